//! Combinatorial model of the once-punctured polygon: ideal and tagged
//! arcs, crossing numbers, triangulations, quiver and potential extraction,
//! flips, and the crossing-vector catalog.
//!
//! Boundary marked points are `0 .. n-1` in **clockwise** order; the single
//! puncture sits in the interior.  Arcs are purely combinatorial:
//!
//! * a [`Arc::Chord`] runs between two boundary points and is recorded by
//!   the clockwise interval it cuts off away from the puncture,
//! * a [`Arc::Radius`] joins a boundary point to the puncture,
//! * a [`Arc::Loop`] is based at a boundary point and encloses the puncture
//!   together with the radius at the same point (a self-folded triangle).
//!
//! Crossing numbers are computed in the universal cover of the punctured
//! disk: the boundary unrolls to the integer points of a line, a chord or
//! loop lifts to a family of arches translated by `n`, and a radius lifts to
//! a family of verticals.  Two arcs cross once for every pair of lifts whose
//! feet strictly interleave, which reduces every case to integer interval
//! arithmetic — no curve geometry is ever drawn.
//!
//! Cluster variables correspond to **tagged** arcs ([`TaggedArc`]): chords,
//! plain radii, and notched radii, for a total of `n^2`.  The tagged
//! crossing number adds one extra crossing for a pair of radii at different
//! feet carrying opposite tags; a triangulation's loop is represented by the
//! notched radius at its base point when crossing tagged arcs.

use std::collections::{BTreeMap, BTreeSet, HashSet, VecDeque};
use std::fmt;
use std::str::FromStr;

use thiserror::Error;

use crate::jacobian::Potential;
use crate::quiver::{Quiver, Role, VatneClass, VatneType};

/// Errors from arc validation, triangulation construction, and realization.
#[derive(Debug, Error)]
pub enum SurfaceError {
    /// An arc had an out-of-range endpoint or span.
    #[error("invalid arc: {0}")]
    BadArc(String),
    /// The arc set is not a valid ideal triangulation.
    #[error("invalid triangulation: {0}")]
    BadTriangulation(String),
    /// The textual format could not be parsed.
    #[error("parse error: {0}")]
    Parse(String),
    /// The quiver is not realizable by a triangulation of the once-punctured
    /// polygon (it is not in the mutation class of `D_n`).
    #[error("quiver is not realizable on the once-punctured polygon")]
    NotRealizable,
    /// The catalog was requested for a quiver outside the four type-D forms.
    #[error("catalog requires a type I-IV classification")]
    WrongType,
    /// An internal consistency check failed (construction bug).
    #[error("internal error: {0}")]
    Internal(String),
}

/// An ideal (untagged) arc on the once-punctured polygon.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Arc {
    /// Boundary-to-boundary arc with feet `start` and `(start + span) % n`,
    /// cutting off the clockwise interval `start .. start + span` away from
    /// the puncture; `2 <= span <= n - 1`.
    Chord { start: usize, span: usize },
    /// Arc from boundary point `foot` to the puncture.
    Radius { foot: usize },
    /// Arc based at `foot` enclosing the puncture (outer edge of a
    /// self-folded triangle whose inner edge is the radius at `foot`).
    Loop { foot: usize },
}

impl Arc {
    fn validate(&self, n: usize) -> Result<(), SurfaceError> {
        match *self {
            Arc::Chord { start, span } => {
                if start >= n || span < 2 || span > n - 1 {
                    return Err(SurfaceError::BadArc(format!(
                        "chord start {start} span {span} out of range for n={n}"
                    )));
                }
            }
            Arc::Radius { foot } | Arc::Loop { foot } => {
                if foot >= n {
                    return Err(SurfaceError::BadArc(format!(
                        "foot {foot} out of range for n={n}"
                    )));
                }
            }
        }
        Ok(())
    }
}

/// A tagged arc: the objects in bijection with cluster variables.  There are
/// exactly `n^2` of them: `n(n-2)` chords and `2n` (plain or notched) radii.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum TaggedArc {
    /// Same combinatorics as [`Arc::Chord`]; never carries a tag.
    Chord { start: usize, span: usize },
    /// Radius at `foot`, either plain or notched at the puncture.
    Radius { foot: usize, notched: bool },
}

impl TaggedArc {
    /// The underlying ideal arc, forgetting the tag.
    pub fn underlying(&self) -> Arc {
        match *self {
            TaggedArc::Chord { start, span } => Arc::Chord { start, span },
            TaggedArc::Radius { foot, .. } => Arc::Radius { foot },
        }
    }
}

/// A lift of an arc to the universal cover (the strip over the integer
/// line): either a vertical ray from a foot to the puncture's ideal point,
/// or an arch between two feet.
enum Lift {
    Vertical(i64),
    Arch(i64, i64),
}

fn lift(a: &Arc, n: usize) -> Lift {
    let n = n as i64;
    match *a {
        Arc::Chord { start, span } => Lift::Arch(start as i64, start as i64 + span as i64),
        Arc::Radius { foot } => Lift::Vertical(foot as i64),
        Arc::Loop { foot } => Lift::Arch(foot as i64, foot as i64 + n),
    }
}

/// Number of integers `k` with `c < p + k n < d`.
fn vertical_arch_crossings(p: i64, c: i64, d: i64, n: i64) -> usize {
    let mut count = 0;
    for k in (c - p).div_euclid(n) - 1..=(d - p).div_euclid(n) + 1 {
        let x = p + k * n;
        if c < x && x < d {
            count += 1;
        }
    }
    count
}

/// Number of translates `k` for which the feet of `(c0 + kn, d0 + kn)`
/// strictly interleave with `(a, b)`.
fn arch_arch_crossings(a: i64, b: i64, c0: i64, d0: i64, n: i64) -> usize {
    let mut count = 0;
    for k in (a - d0).div_euclid(n) - 1..=(b - c0).div_euclid(n) + 1 {
        let c = c0 + k * n;
        let d = d0 + k * n;
        if (a < c && c < b && b < d) || (c < a && a < d && d < b) {
            count += 1;
        }
    }
    count
}

/// Minimal crossing number of two ideal arcs on the once-punctured
/// `n`-gon.
pub fn crossing_number(a: &Arc, b: &Arc, n: usize) -> usize {
    if a == b {
        return 0;
    }
    let ni = n as i64;
    match (lift(a, n), lift(b, n)) {
        (Lift::Vertical(_), Lift::Vertical(_)) => 0,
        (Lift::Vertical(p), Lift::Arch(c, d)) | (Lift::Arch(c, d), Lift::Vertical(p)) => {
            vertical_arch_crossings(p, c, d, ni)
        }
        (Lift::Arch(a1, b1), Lift::Arch(c, d)) => arch_arch_crossings(a1, b1, c, d, ni),
    }
}

/// Tagged crossing number of two tagged arcs: the crossing number of the
/// underlying arcs, plus one when both are radii at different feet with
/// opposite tags.  Arcs with the same underlying curve never cross.
pub fn tagged_crossing(a: &TaggedArc, b: &TaggedArc, n: usize) -> usize {
    let ua = a.underlying();
    let ub = b.underlying();
    if ua == ub {
        return 0;
    }
    let mut e = crossing_number(&ua, &ub, n);
    if let (
        TaggedArc::Radius {
            foot: f1,
            notched: t1,
        },
        TaggedArc::Radius {
            foot: f2,
            notched: t2,
        },
    ) = (a, b)
    {
        if f1 != f2 && t1 != t2 {
            e += 1;
        }
    }
    e
}

/// One side of an ideal triangle.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    /// Boundary segment from point `p` to point `(p + 1) % n`.
    Boundary(usize),
    /// Arc with the given index into the triangulation's arc list.
    Arc(usize),
}

/// An ideal triangle, its three sides in the cyclic order traced around the
/// face; consecutive arc sides `(x, y)` contribute the quiver arrow
/// `y -> x`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Triangle {
    /// The three sides in cyclic face order.
    pub sides: [Side; 3],
}

impl Triangle {
    /// Arc indices of the sides, with `None` for boundary sides.
    fn arc_sides(&self) -> [Option<usize>; 3] {
        let f = |s: &Side| match s {
            Side::Boundary(_) => None,
            Side::Arc(i) => Some(*i),
        };
        [f(&self.sides[0]), f(&self.sides[1]), f(&self.sides[2])]
    }

    /// Whether this is the self-folded triangle (a loop with its radius
    /// traversed twice).
    pub fn is_self_folded(&self) -> bool {
        let a = self.arc_sides();
        (a[0].is_some() && a[0] == a[1])
            || (a[1].is_some() && a[1] == a[2])
            || (a[2].is_some() && a[2] == a[0])
    }
}

/// An ideal triangulation of the once-punctured `n`-gon: `n` pairwise
/// compatible arcs together with the derived triangle list.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Triangulation {
    /// Number of boundary marked points.
    pub n: usize,
    arcs: Vec<Arc>,
    triangles: Vec<Triangle>,
}

impl Triangulation {
    /// Validates the arc set and derives the ideal triangles.
    pub fn new(n: usize, arcs: Vec<Arc>) -> Result<Self, SurfaceError> {
        if n < 3 {
            return Err(SurfaceError::BadTriangulation(format!(
                "need at least 3 boundary points, got {n}"
            )));
        }
        if arcs.len() != n {
            return Err(SurfaceError::BadTriangulation(format!(
                "expected {n} arcs, got {}",
                arcs.len()
            )));
        }
        for a in &arcs {
            a.validate(n)?;
        }
        for (i, a) in arcs.iter().enumerate() {
            for b in &arcs[i + 1..] {
                if a == b {
                    return Err(SurfaceError::BadTriangulation(format!(
                        "duplicate arc {a}"
                    )));
                }
                if crossing_number(a, b, n) != 0 {
                    return Err(SurfaceError::BadTriangulation(format!(
                        "arcs {a} and {b} cross"
                    )));
                }
            }
        }
        for a in &arcs {
            if let Arc::Loop { foot } = a {
                if !arcs.contains(&Arc::Radius { foot: *foot }) {
                    return Err(SurfaceError::BadTriangulation(format!(
                        "loop at {foot} without its radius"
                    )));
                }
            }
        }
        let triangles = trace_faces(n, &arcs)?;
        Ok(Triangulation { n, arcs, triangles })
    }

    /// The arcs, indexed by quiver vertex.
    pub fn arcs(&self) -> &[Arc] {
        &self.arcs
    }

    /// The ideal triangles.
    pub fn triangles(&self) -> &[Triangle] {
        &self.triangles
    }

    /// The tagged view: each loop becomes the notched radius at its base
    /// point, everything else keeps its plain form.
    pub fn tagged_view(&self) -> Vec<TaggedArc> {
        self.arcs
            .iter()
            .map(|a| match *a {
                Arc::Chord { start, span } => TaggedArc::Chord { start, span },
                Arc::Radius { foot } => TaggedArc::Radius {
                    foot,
                    notched: false,
                },
                Arc::Loop { foot } => TaggedArc::Radius {
                    foot,
                    notched: true,
                },
            })
            .collect()
    }
}

/// Traces the faces of the triangulation's planar embedding via a rotation
/// system and returns the internal triangles in deterministic order.
fn trace_faces(n: usize, arcs: &[Arc]) -> Result<Vec<Triangle>, SurfaceError> {
    let ni = n as i64;
    let edge_count = 2 * n; // n boundary segments + n arcs
    let dart_count = 2 * edge_count;
    // Dart 2e runs tail->head of edge e, dart 2e+1 the reverse.
    let mut head = vec![0usize; dart_count];
    let mut tail = vec![0usize; dart_count];
    // Rotation lists: darts around each vertex in clockwise order, sorted by
    // a combinatorial key.  Vertex n is the puncture.
    let mut rot: Vec<Vec<(i64, usize)>> = vec![Vec::new(); n + 1];
    for p in 0..n {
        let e = p;
        let q = (p + 1) % n;
        tail[2 * e] = p;
        head[2 * e] = q;
        tail[2 * e + 1] = q;
        head[2 * e + 1] = p;
        // Departing clockwise along the boundary comes first; departing
        // counterclockwise comes last.
        rot[p].push((2, 2 * e));
        rot[q].push((4 * ni, 2 * e + 1));
    }
    for (i, a) in arcs.iter().enumerate() {
        let e = n + i;
        match *a {
            Arc::Chord { start, span } => {
                let end = (start + span) % n;
                tail[2 * e] = start;
                head[2 * e] = end;
                tail[2 * e + 1] = end;
                head[2 * e + 1] = start;
                rot[start].push((2 * span as i64, 2 * e));
                rot[end].push((4 * ni + 2 - 2 * span as i64, 2 * e + 1));
            }
            Arc::Radius { foot } => {
                tail[2 * e] = foot;
                head[2 * e] = n;
                tail[2 * e + 1] = n;
                head[2 * e + 1] = foot;
                rot[foot].push((2 * ni + 1, 2 * e));
                // Around the puncture, clockwise order is ascending foot.
                rot[n].push((foot as i64, 2 * e + 1));
            }
            Arc::Loop { foot } => {
                tail[2 * e] = foot;
                head[2 * e] = foot;
                tail[2 * e + 1] = foot;
                head[2 * e + 1] = foot;
                // The two loop darts sandwich the radius at the same foot.
                rot[foot].push((2 * ni, 2 * e));
                rot[foot].push((2 * ni + 2, 2 * e + 1));
            }
        }
    }
    let mut pos = vec![(0usize, 0usize); dart_count];
    for (v, list) in rot.iter_mut().enumerate() {
        list.sort_unstable();
        for (idx, &(_, d)) in list.iter().enumerate() {
            pos[d] = (v, idx);
        }
    }
    // Next dart along the face boundary (face kept on the right): reverse
    // the dart, then step one place counterclockwise in the rotation at its
    // tail.
    let next = |d: usize| -> usize {
        let rev = d ^ 1;
        let (v, idx) = pos[rev];
        let list = &rot[v];
        list[(idx + list.len() - 1) % list.len()].1
    };
    let mut visited = vec![false; dart_count];
    let mut triangles = Vec::new();
    let mut outer_faces = 0;
    for start in 0..dart_count {
        if visited[start] {
            continue;
        }
        let mut orbit = Vec::new();
        let mut d = start;
        loop {
            visited[d] = true;
            orbit.push(d);
            d = next(d);
            if d == start {
                break;
            }
        }
        let sides: Vec<Side> = orbit
            .iter()
            .map(|&d| {
                let e = d / 2;
                if e < n {
                    Side::Boundary(e)
                } else {
                    Side::Arc(e - n)
                }
            })
            .collect();
        if sides.iter().all(|s| matches!(s, Side::Boundary(_))) {
            outer_faces += 1;
            continue;
        }
        if sides.len() != 3 {
            return Err(SurfaceError::BadTriangulation(format!(
                "face with {} sides; the arc set is not maximal",
                sides.len()
            )));
        }
        triangles.push(Triangle {
            sides: [sides[0], sides[1], sides[2]],
        });
    }
    if outer_faces != 1 || triangles.len() != n {
        return Err(SurfaceError::BadTriangulation(format!(
            "face census mismatch: {} internal, {} outer",
            triangles.len(),
            outer_faces
        )));
    }
    Ok(triangles)
}

/// The adjacency quiver of a triangulation: one vertex per arc; each ideal
/// triangle contributes an arrow between each pair of consecutive arc
/// sides; the self-folded triangle is skipped and its radius instead copies
/// every arrow of its loop; opposite arrow pairs cancel.
pub fn quiver_from_triangulation(t: &Triangulation) -> Quiver {
    let mut arrows: Vec<(usize, usize)> = Vec::new();
    for tri in t.triangles() {
        if tri.is_self_folded() {
            continue;
        }
        let a = tri.arc_sides();
        for k in 0..3 {
            if let (Some(x), Some(y)) = (a[k], a[(k + 1) % 3]) {
                arrows.push((y, x));
            }
        }
    }
    // Self-folded rule: the radius connects to everything its loop connects
    // to, never to the loop itself.
    let mut extra = Vec::new();
    for (li, a) in t.arcs().iter().enumerate() {
        if let Arc::Loop { foot } = a {
            let ri = t
                .arcs()
                .iter()
                .position(|b| *b == Arc::Radius { foot: *foot })
                .expect("validated loop has its radius");
            for &(s, tgt) in &arrows {
                if s == li {
                    extra.push((ri, tgt));
                }
                if tgt == li {
                    extra.push((s, ri));
                }
            }
        }
    }
    arrows.extend(extra);
    // Cancel opposite arrows pairwise (e.g. the two triangles of a
    // punctured bigon contribute opposite arrows between its radii).
    let mut mult: BTreeMap<(usize, usize), isize> = BTreeMap::new();
    for (s, tgt) in arrows {
        if let Some(m) = mult.get_mut(&(tgt, s)) {
            if *m > 0 {
                *m -= 1;
                continue;
            }
        }
        *mult.entry((s, tgt)).or_insert(0) += 1;
    }
    let mut flat = Vec::new();
    for ((s, tgt), m) in mult {
        for _ in 0..m {
            flat.push((s, tgt));
        }
    }
    Quiver::new(t.n, flat).expect("triangulation quiver is loop-free and 2-cycle-free")
}

/// The potential of a triangulation: one cyclic term per internal triangle
/// whose three sides are all arcs, minus the cycle around the puncture when
/// at least three plain radii are present.  The relative sign is forced by
/// the arc modules: with the `{0,1}` matrices of the segment rule, the
/// cyclic derivative of a shared central arrow composites to zero only when
/// the triangle and puncture terms carry opposite signs.  Terms whose
/// arrows were cancelled from the quiver (punctured-bigon degeneration) are
/// omitted.
pub fn potential_from_triangulation(t: &Triangulation) -> Potential {
    let q = quiver_from_triangulation(t);
    let has = |s: usize, tgt: usize| q.arrow_mult(s, tgt) > 0;
    let mut w = Potential::zero();
    for tri in t.triangles() {
        if tri.is_self_folded() {
            continue;
        }
        if let [Some(x0), Some(x1), Some(x2)] = tri.arc_sides() {
            let cycle = vec![(x1, x0), (x0, x2), (x2, x1)];
            if cycle.iter().all(|&(s, tgt)| has(s, tgt)) {
                w.add_cycle(1, cycle.clone()).expect("triangle term is a cycle");
            }
            // If a side is the loop of a self-folded triangle, the cycle
            // around the enclosed puncture is the same cycle with the loop
            // replaced by its radius, with the opposite sign.
            for (li, a) in t.arcs().iter().enumerate() {
                if let Arc::Loop { foot } = a {
                    if ![x0, x1, x2].contains(&li) {
                        continue;
                    }
                    let ri = t
                        .arcs()
                        .iter()
                        .position(|b| *b == Arc::Radius { foot: *foot })
                        .expect("validated loop has its radius");
                    let sub: Vec<(usize, usize)> = cycle
                        .iter()
                        .map(|&(s, tgt)| {
                            (
                                if s == li { ri } else { s },
                                if tgt == li { ri } else { tgt },
                            )
                        })
                        .collect();
                    if sub.iter().all(|&(s, tgt)| has(s, tgt)) {
                        w.add_cycle(-1, sub).expect("pocket puncture term is a cycle");
                    }
                }
            }
        }
    }
    // The counterclockwise cycle around the puncture: consecutive radii in
    // clockwise foot order carry arrows forming one oriented cycle.
    let mut radii: Vec<(usize, usize)> = t
        .arcs()
        .iter()
        .enumerate()
        .filter_map(|(i, a)| match a {
            Arc::Radius { foot } => Some((*foot, i)),
            _ => None,
        })
        .collect();
    radii.sort_unstable();
    let has_loop = t.arcs().iter().any(|a| matches!(a, Arc::Loop { .. }));
    if radii.len() >= 3 && !has_loop {
        let cycle: Vec<(usize, usize)> = (0..radii.len())
            .map(|k| (radii[k].1, radii[(k + 1) % radii.len()].1))
            .collect();
        if cycle.iter().all(|&(s, tgt)| has(s, tgt)) {
            w.add_cycle(-1, cycle).expect("puncture term is a cycle");
        }
    }
    w
}

/// All `n^2` tagged arcs in deterministic order: chords by `(start, span)`,
/// then plain radii, then notched radii.
pub fn all_tagged_arcs(n: usize) -> Vec<TaggedArc> {
    let mut v = Vec::new();
    for start in 0..n {
        for span in 2..n {
            v.push(TaggedArc::Chord { start, span });
        }
    }
    for foot in 0..n {
        v.push(TaggedArc::Radius {
            foot,
            notched: false,
        });
    }
    for foot in 0..n {
        v.push(TaggedArc::Radius {
            foot,
            notched: true,
        });
    }
    v
}

/// Flips arc `i`: removes it and inserts the unique other tagged arc
/// completing the remaining `n - 1` arcs to a tagged triangulation, then
/// normalizes back to an ideal triangulation (a notched radius paired with
/// its plain radius becomes a loop; an all-notched puncture is un-notched).
pub fn flip(t: &Triangulation, i: usize) -> Result<Triangulation, SurfaceError> {
    if i >= t.n {
        return Err(SurfaceError::BadArc(format!("arc index {i} out of range")));
    }
    let mut tagged = t.tagged_view();
    let removed = tagged[i];
    let mut candidate = None;
    'arcs: for g in all_tagged_arcs(t.n) {
        if g == removed {
            continue;
        }
        for (j, o) in tagged.iter().enumerate() {
            if j == i {
                continue;
            }
            if *o == g || tagged_crossing(&g, o, t.n) != 0 {
                continue 'arcs;
            }
        }
        if candidate.replace(g).is_some() {
            return Err(SurfaceError::Internal(
                "multiple completions while flipping".into(),
            ));
        }
    }
    let g = candidate.ok_or_else(|| SurfaceError::Internal("no completion while flipping".into()))?;
    tagged[i] = g;
    let plain_feet: BTreeSet<usize> = tagged
        .iter()
        .filter_map(|a| match a {
            TaggedArc::Radius {
                foot,
                notched: false,
            } => Some(*foot),
            _ => None,
        })
        .collect();
    let notched_feet: Vec<usize> = tagged
        .iter()
        .filter_map(|a| match a {
            TaggedArc::Radius {
                foot,
                notched: true,
            } => Some(*foot),
            _ => None,
        })
        .collect();
    let paired = notched_feet.iter().filter(|f| plain_feet.contains(f)).count();
    if paired > 0 && paired != notched_feet.len() {
        return Err(SurfaceError::Internal(
            "mixed tagging at the puncture after flip".into(),
        ));
    }
    let arcs: Vec<Arc> = tagged
        .into_iter()
        .map(|a| match a {
            TaggedArc::Chord { start, span } => Arc::Chord { start, span },
            TaggedArc::Radius {
                foot,
                notched: false,
            } => Arc::Radius { foot },
            TaggedArc::Radius {
                foot,
                notched: true,
            } => {
                if plain_feet.contains(&foot) {
                    Arc::Loop { foot }
                } else {
                    Arc::Radius { foot }
                }
            }
        })
        .collect();
    Triangulation::new(t.n, arcs)
}

/// Builds the all-radii "wheel" triangulation realizing `q` when `q` is a
/// single oriented cycle through every vertex.
fn wheel_triangulation(q: &Quiver) -> Option<Triangulation> {
    let n = q.n;
    if q.arrows().len() != n {
        return None;
    }
    let mut succ = vec![usize::MAX; n];
    for &(s, t) in q.arrows() {
        if succ[s] != usize::MAX {
            return None;
        }
        succ[s] = t;
    }
    if succ.iter().any(|&s| s == usize::MAX) {
        return None;
    }
    let mut order = vec![0usize];
    for _ in 1..n {
        let next = succ[*order.last().expect("nonempty")];
        if order.contains(&next) {
            return None;
        }
        order.push(next);
    }
    if succ[*order.last().expect("nonempty")] != 0 {
        return None;
    }
    for feet in [
        (0..n).collect::<Vec<_>>(),
        (0..n).map(|j| (n - j) % n).collect::<Vec<_>>(),
    ] {
        let mut arcs = vec![Arc::Radius { foot: 0 }; n];
        for (j, &v) in order.iter().enumerate() {
            arcs[v] = Arc::Radius { foot: feet[j] };
        }
        if let Ok(t) = Triangulation::new(n, arcs) {
            if &quiver_from_triangulation(&t) == q {
                return Some(t);
            }
        }
    }
    None
}

/// Finds an ideal triangulation whose quiver equals `q` (labels included),
/// by mutating `q` to an all-radii wheel and replaying the mutation word as
/// flips.  Fails with [`SurfaceError::NotRealizable`] when `q` is not in
/// the mutation class of `D_n`.
pub fn realize_triangulation(q: &Quiver) -> Result<Triangulation, SurfaceError> {
    if q.frozen != 0 || q.n < 3 {
        return Err(SurfaceError::NotRealizable);
    }
    let mut seen: HashSet<Quiver> = HashSet::new();
    let mut queue: VecDeque<(Quiver, Vec<usize>)> = VecDeque::new();
    seen.insert(q.clone());
    queue.push_back((q.clone(), Vec::new()));
    while let Some((cur, word)) = queue.pop_front() {
        if let Some(mut t) = wheel_triangulation(&cur) {
            for &k in word.iter().rev() {
                t = flip(&t, k)?;
            }
            if &quiver_from_triangulation(&t) != q {
                return Err(SurfaceError::Internal(
                    "flip replay did not reproduce the quiver".into(),
                ));
            }
            return Ok(t);
        }
        if seen.len() > 250_000 {
            return Err(SurfaceError::NotRealizable);
        }
        for k in 0..cur.n {
            let next = cur.mutate(k).expect("unfrozen quiver");
            if !seen.contains(&next) {
                seen.insert(next.clone());
                let mut w = word.clone();
                w.push(k);
                queue.push_back((next, w));
            }
        }
    }
    Err(SurfaceError::NotRealizable)
}

/// Tagged crossing number of tagged arc `g` with arc `arc_index` of the
/// triangulation (the triangulation's loops count as notched radii).
pub fn tagged_crossing_number(t: &Triangulation, g: &TaggedArc, arc_index: usize) -> usize {
    tagged_crossing(g, &t.tagged_view()[arc_index], t.n)
}

/// The crossing vector of tagged arc `g` against the triangulation.
pub fn crossing_vector(t: &Triangulation, g: &TaggedArc) -> Vec<u8> {
    let tv = t.tagged_view();
    tv.iter()
        .map(|o| {
            let e = tagged_crossing(g, o, t.n);
            debug_assert!(e <= 2, "crossing number above 2 on the punctured disk");
            e as u8
        })
        .collect()
}

/// The crossing vector of a plain ideal arc (chords, radii, or loops)
/// against the triangulation, using untagged crossing numbers throughout.
pub fn crossing_vector_plain(t: &Triangulation, a: &Arc) -> Vec<u8> {
    t.arcs()
        .iter()
        .map(|b| crossing_number(a, b, t.n) as u8)
        .collect()
}

/// A crossing vector from the catalog, with its Appendix-style family tag.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CrossingVector {
    /// Entries in `{0, 1, 2}`, indexed by quiver vertex.
    pub entries: Vec<u8>,
    /// Structural family tag (provenance metadata).
    pub provenance: String,
}

impl fmt::Display for CrossingVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.entries.iter().map(|e| e.to_string()).collect();
        write!(f, "{}", parts.join(","))
    }
}

/// Whether the support of `entries` induces a connected subquiver.
pub fn support_connected(q: &Quiver, entries: &[u8]) -> bool {
    let supp: BTreeSet<usize> = entries
        .iter()
        .enumerate()
        .filter_map(|(i, &e)| (e > 0).then_some(i))
        .collect();
    induced_connected(q, &supp)
}

/// Whether the vertices with entry 2 induce a connected tree subquiver.
pub fn supp2_connected_tree(q: &Quiver, entries: &[u8]) -> bool {
    let supp: BTreeSet<usize> = entries
        .iter()
        .enumerate()
        .filter_map(|(i, &e)| (e == 2).then_some(i))
        .collect();
    if supp.is_empty() {
        return true;
    }
    let edges = q
        .arrows()
        .iter()
        .filter(|(s, t)| supp.contains(s) && supp.contains(t))
        .count();
    induced_connected(q, &supp) && edges + 1 == supp.len()
}

fn induced_connected(q: &Quiver, supp: &BTreeSet<usize>) -> bool {
    let Some(&start) = supp.iter().next() else {
        return true;
    };
    let mut seen: BTreeSet<usize> = BTreeSet::new();
    seen.insert(start);
    let mut queue = VecDeque::from([start]);
    while let Some(v) = queue.pop_front() {
        for w in q.neighbors(v) {
            if supp.contains(&w) && seen.insert(w) {
                queue.push_back(w);
            }
        }
    }
    seen.len() == supp.len()
}

/// Structural family tag for a catalog entry (provenance metadata; the
/// binding correctness checks are the count and cross-oracle tests).
fn classify_family(vc: &VatneClass, g: &TaggedArc, entries: &[u8]) -> String {
    let at_role = |r: Role| -> Vec<u8> {
        vc.role_map
            .iter()
            .filter(|(_, role)| **role == r)
            .map(|(&v, _)| entries[v])
            .collect()
    };
    let has_two = entries.iter().any(|&e| e == 2);
    match vc.type_tag {
        VatneType::I => {
            let (da, db, dc) = (at_role(Role::A)[0], at_role(Role::B)[0], at_role(Role::C)[0]);
            match (da, db, dc) {
                (0, 0, 0) => "I:family-I".into(),
                (0, 0, 1) => "I:family-II".into(),
                (1, 1, 1) => "I:family-III".into(),
                (0, 1, 1) | (1, 0, 1) => "I:family-IV".into(),
                (0, 1, 0) | (1, 0, 0) if entries.iter().map(|&e| e as usize).sum::<usize>() == 1 => {
                    "I:tagged-fork".into()
                }
                (1, 1, 2) => "I:family-V".into(),
                _ => "I:other".into(),
            }
        }
        VatneType::II | VatneType::III => {
            let tag = if vc.type_tag == VatneType::II { "II" } else { "III" };
            let (da, db, dc, dd) = (
                at_role(Role::A)[0],
                at_role(Role::B)[0],
                at_role(Role::C)[0],
                at_role(Role::D)[0],
            );
            if has_two {
                format!("{tag}:twice-crossing")
            } else if dc == 0 || dd == 0 {
                format!("{tag}:type-I-degenerate")
            } else {
                match (vc.type_tag, da, db) {
                    (VatneType::II, 1, 1) => "II:family-I".into(),
                    (VatneType::II, 0, 0) => "II:family-II".into(),
                    (VatneType::III, 1, 0) => "III:family-I".into(),
                    (VatneType::III, 0, 1) => "III:family-II".into(),
                    _ => format!("{tag}:other"),
                }
            }
        }
        VatneType::IV => {
            let b = at_role(Role::CentralCycle);
            let spikes = at_role(Role::Spike);
            if has_two {
                let two_at_spike = vc
                    .role_map
                    .iter()
                    .any(|(&v, r)| *r == Role::Spike && entries[v] == 2);
                if two_at_spike && b.iter().all(|&e| e == 1) {
                    "IV:family-XI".into()
                } else {
                    "IV:twice-crossing".into()
                }
            } else {
                match g {
                    TaggedArc::Radius { notched: true, .. } => {
                        if b.iter().all(|&e| e == 1) {
                            "IV:family-VIII-tagged".into()
                        } else {
                            "IV:family-IX".into()
                        }
                    }
                    TaggedArc::Radius { notched: false, .. } => "IV:family-VIII-plain".into(),
                    TaggedArc::Chord { .. } => {
                        let bsup = b.iter().filter(|&&e| e > 0).count();
                        let outside = entries
                            .iter()
                            .enumerate()
                            .any(|(v, &e)| e > 0 && vc.role_map[&v] != Role::CentralCycle);
                        if bsup == 0 {
                            "IV:family-I".into()
                        } else if !outside {
                            "IV:family-X".into()
                        } else {
                            let _ = spikes;
                            "IV:family-II-VII".into()
                        }
                    }
                }
            }
        }
        VatneType::NotTypeD => "unclassified".into(),
    }
}

/// Every crossing vector of every non-initial tagged arc with respect to a
/// triangulation realizing `q`, tagged with its structural family, sorted
/// by entries, deduplicated.
pub fn catalog_dvectors(
    q: &Quiver,
    vc: &VatneClass,
) -> Result<Vec<CrossingVector>, SurfaceError> {
    if vc.type_tag == VatneType::NotTypeD {
        return Err(SurfaceError::WrongType);
    }
    if q.n < 4 {
        return Err(SurfaceError::WrongType);
    }
    let t = realize_triangulation(q)?;
    let initial: BTreeSet<TaggedArc> = t.tagged_view().into_iter().collect();
    let mut out: Vec<CrossingVector> = Vec::new();
    for g in all_tagged_arcs(q.n) {
        if initial.contains(&g) {
            continue;
        }
        let entries = crossing_vector(&t, &g);
        let provenance = classify_family(vc, &g, &entries);
        out.push(CrossingVector { entries, provenance });
    }
    out.sort_by(|a, b| a.entries.cmp(&b.entries));
    out.dedup_by(|a, b| a.entries == b.entries);
    Ok(out)
}

impl fmt::Display for Arc {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            Arc::Chord { start, span } => write!(f, "chord {start} {span} cw-span"),
            Arc::Radius { foot } => write!(f, "radius {foot}"),
            Arc::Loop { foot } => write!(f, "loop {foot}"),
        }
    }
}

impl fmt::Display for Triangulation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "n={}", self.n)?;
        for (i, a) in self.arcs.iter().enumerate() {
            if i > 0 {
                writeln!(f)?;
            }
            match *a {
                Arc::Chord { start, span } => {
                    write!(f, "chord {start} {} cw", (start + span) % self.n)?
                }
                Arc::Radius { foot } => write!(f, "radius {foot}")?,
                Arc::Loop { foot } => write!(f, "loop {foot}")?,
            }
        }
        Ok(())
    }
}

impl FromStr for Triangulation {
    type Err = SurfaceError;

    /// Parses the textual format: a line `n=<int>`, then one line per arc:
    /// `chord <i> <j> <cw|ccw>` (the side on which the arc hugs the
    /// boundary from `i` to `j`), `radius <i>`, or `loop <i>`.
    fn from_str(s: &str) -> Result<Self, SurfaceError> {
        let mut lines = s.lines().map(str::trim).filter(|l| !l.is_empty());
        let first = lines
            .next()
            .ok_or_else(|| SurfaceError::Parse("empty input".into()))?;
        let n: usize = first
            .strip_prefix("n=")
            .and_then(|v| v.trim().parse().ok())
            .ok_or_else(|| SurfaceError::Parse(format!("expected `n=<int>`, got `{first}`")))?;
        let mut arcs = Vec::new();
        for line in lines {
            let tok: Vec<&str> = line.split_whitespace().collect();
            let parse_idx = |s: &str| -> Result<usize, SurfaceError> {
                s.parse()
                    .map_err(|_| SurfaceError::Parse(format!("bad index `{s}`")))
            };
            match tok.as_slice() {
                ["chord", i, j, side] => {
                    let i = parse_idx(i)?;
                    let j = parse_idx(j)?;
                    if i >= n || j >= n {
                        return Err(SurfaceError::Parse(format!("endpoint out of range: {line}")));
                    }
                    let (start, span) = match *side {
                        "cw" => (i, (j + n - i) % n),
                        "ccw" => (j, (i + n - j) % n),
                        _ => {
                            return Err(SurfaceError::Parse(format!(
                                "expected cw or ccw in `{line}`"
                            )))
                        }
                    };
                    arcs.push(Arc::Chord { start, span });
                }
                ["radius", i] => arcs.push(Arc::Radius { foot: parse_idx(i)? }),
                ["loop", i] => arcs.push(Arc::Loop { foot: parse_idx(i)? }),
                _ => return Err(SurfaceError::Parse(format!("bad arc line `{line}`"))),
            }
        }
        Triangulation::new(n, arcs)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quiver::classify_vatne;

    fn chord(start: usize, span: usize) -> Arc {
        Arc::Chord { start, span }
    }

    fn radius(foot: usize) -> Arc {
        Arc::Radius { foot }
    }

    #[test]
    fn crossing_number_basics() {
        let n = 5;
        assert_eq!(crossing_number(&Arc::Loop { foot: 0 }, &Arc::Loop { foot: 2 }, n), 2);
        assert_eq!(crossing_number(&Arc::Loop { foot: 0 }, &radius(0), n), 0);
        assert_eq!(crossing_number(&Arc::Loop { foot: 0 }, &radius(3), n), 1);
        assert_eq!(crossing_number(&radius(1), &radius(3), n), 0);
        // Chord 0-2 hugs vertex 1 only.
        assert_eq!(crossing_number(&chord(0, 2), &radius(1), n), 1);
        assert_eq!(crossing_number(&chord(0, 2), &radius(3), n), 0);
        assert_eq!(crossing_number(&chord(0, 2), &Arc::Loop { foot: 1 }, n), 2);
        assert_eq!(crossing_number(&chord(0, 2), &Arc::Loop { foot: 3 }, n), 0);
        // Chords 0-2 and 1-3 cross once.
        assert_eq!(crossing_number(&chord(0, 2), &chord(1, 2), n), 1);
        // Same endpoints, opposite sides of the puncture: compatible.
        assert_eq!(crossing_number(&chord(0, 2), &chord(2, 3), n), 0);
        // Two almost-loops on the punctured square cross twice.
        assert_eq!(crossing_number(&chord(0, 3), &chord(2, 3), 4), 2);
    }

    #[test]
    fn tagged_crossing_basics() {
        let n = 5;
        let plain = |foot| TaggedArc::Radius { foot, notched: false };
        let notch = |foot| TaggedArc::Radius { foot, notched: true };
        assert_eq!(tagged_crossing(&notch(0), &notch(2), n), 0);
        assert_eq!(tagged_crossing(&plain(0), &notch(2), n), 1);
        assert_eq!(tagged_crossing(&plain(0), &notch(0), n), 0);
        assert_eq!(tagged_crossing(&plain(0), &plain(2), n), 0);
        let c = TaggedArc::Chord { start: 0, span: 2 };
        assert_eq!(tagged_crossing(&notch(1), &c, n), 1);
        assert_eq!(tagged_crossing(&notch(3), &c, n), 0);
    }

    /// The punctured pentagon with a self-folded triangle at vertex 0: an
    /// internal triangle of chords plus a loop/radius pair.  The quiver is
    /// a 3-cycle on the chords with the loop and radius both pointing at
    /// the chord enclosing them.
    fn pentagon() -> Triangulation {
        Triangulation::new(
            5,
            vec![
                chord(1, 2),           // 1-3, hugging 2
                chord(3, 2),           // 3-0, hugging 4
                chord(1, 4),           // 1-0, hugging 2,3,4 (encloses the pocket)
                Arc::Loop { foot: 0 },
                radius(0),
            ],
        )
        .expect("valid triangulation")
    }

    #[test]
    fn pentagon_self_folded_quiver() {
        let q = quiver_from_triangulation(&pentagon());
        assert_eq!(q.arrows(), &[(0, 2), (1, 0), (2, 1), (3, 2), (4, 2)]);
        let c = classify_vatne(&q);
        assert_eq!(c.type_tag, VatneType::I);
        assert_eq!(c.role_map[&2], Role::C);
    }

    #[test]
    fn pentagon_potential_is_one_triangle() {
        let w = potential_from_triangulation(&pentagon());
        assert_eq!(w.terms().len(), 1);
        let arrows = w.arrows();
        assert!(arrows.contains(&(0, 2)) && arrows.contains(&(2, 1)) && arrows.contains(&(1, 0)));
    }

    fn wheel(n: usize) -> Triangulation {
        Triangulation::new(n, (0..n).map(|f| radius(f)).collect()).expect("wheel")
    }

    #[test]
    fn wheel_quiver_is_oriented_cycle() {
        let q = quiver_from_triangulation(&wheel(4));
        assert_eq!(q.arrows(), &[(0, 1), (1, 2), (2, 3), (3, 0)]);
        let w = potential_from_triangulation(&wheel(4));
        assert_eq!(w.terms().len(), 1);
        assert_eq!(w.terms()[0].1.len(), 4);
    }

    #[test]
    fn flip_matches_mutation() {
        for t in [pentagon(), wheel(4), wheel(5)] {
            let q = quiver_from_triangulation(&t);
            for i in 0..t.n {
                let flipped = flip(&t, i).expect("flip");
                assert_eq!(
                    quiver_from_triangulation(&flipped),
                    q.mutate(i).expect("mutate"),
                    "flip/mutation mismatch at arc {i}"
                );
                // Flipping back recovers the triangulation as a set.
                let back = flip(&flipped, i).expect("flip back");
                let mut got = back.arcs().to_vec();
                let mut want = t.arcs().to_vec();
                got.sort_unstable();
                want.sort_unstable();
                assert_eq!(got, want);
            }
        }
    }

    #[test]
    fn deep_flips_match_mutation_words() {
        let mut t = wheel(4);
        let mut q = quiver_from_triangulation(&t);
        for k in [0, 2, 1, 3, 0, 1, 2, 0, 3, 1] {
            t = flip(&t, k).expect("flip");
            q = q.mutate(k).expect("mutate");
            assert_eq!(quiver_from_triangulation(&t), q);
        }
    }

    #[test]
    fn realize_wheel_and_fork() {
        let cycle: Quiver = "n=4\narrows=0->2,2->1,1->3,3->0".parse().unwrap();
        let t = realize_triangulation(&cycle).expect("realizable");
        assert_eq!(quiver_from_triangulation(&t), cycle);
        let linear: Quiver = "n=4\narrows=0->2,1->2,2->3".parse().unwrap();
        let t = realize_triangulation(&linear).expect("realizable");
        assert_eq!(quiver_from_triangulation(&t), linear);
        let a4: Quiver = "n=4\narrows=0->1,1->2,2->3".parse().unwrap();
        assert!(realize_triangulation(&a4).is_err());
    }

    /// The punctured heptagon with three radii and three corner triangles;
    /// arcs ordered so that the loop at vertex 6 has crossing vector
    /// (0,2,1,1,1,0,0).
    fn heptagon() -> Triangulation {
        Triangulation::new(
            7,
            vec![
                chord(4, 2), // 4-6, hugging 5
                chord(4, 3), // 4-0, hugging 5,6: the spike enclosing the pocket
                radius(0),
                radius(2),
                radius(4),
                chord(0, 2), // 0-2, hugging 1
                chord(2, 2), // 2-4, hugging 3
            ],
        )
        .expect("valid triangulation")
    }

    #[test]
    fn heptagon_loop_crossing_vector() {
        let t = heptagon();
        let q = quiver_from_triangulation(&t);
        let c = classify_vatne(&q);
        assert_eq!(c.type_tag, VatneType::IV);
        assert_eq!(c.spikes.len(), 3);
        let d = crossing_vector_plain(&t, &Arc::Loop { foot: 6 });
        assert_eq!(d, vec![0, 2, 1, 1, 1, 0, 0]);
        // Four potential terms: three corner triangles plus the puncture
        // cycle on the radii.
        let w = potential_from_triangulation(&t);
        assert_eq!(w.terms().len(), 4);
    }

    #[test]
    fn catalog_counts_and_support_lemmas() {
        let quivers = [
            "n=4\narrows=0->2,1->2,2->3",                       // type I
            "n=4\narrows=2->0,0->3,2->1,1->3,3->2",             // type II
            "n=4\narrows=0->1,1->2,2->3,3->0",                  // type III
            "n=5\narrows=0->1,1->2,2->0,1->3,3->0,2->4,4->1",   // type IV, two spikes
            "n=6\narrows=5->3,3->4,4->5,3->2,2->5,2->1,1->0,0->2", // type IV with tail
        ];
        for text in quivers {
            let q: Quiver = text.parse().unwrap();
            let vc = classify_vatne(&q);
            assert_ne!(vc.type_tag, VatneType::NotTypeD, "{text}");
            let catalog = catalog_dvectors(&q, &vc).expect("catalog");
            assert_eq!(catalog.len(), q.n * q.n - q.n, "count for {text}");
            for cv in &catalog {
                assert!(cv.entries.iter().all(|&e| e <= 2));
                assert!(support_connected(&q, &cv.entries), "support of {cv} for {text}");
                assert!(supp2_connected_tree(&q, &cv.entries), "supp2 of {cv} for {text}");
            }
        }
    }

    #[test]
    fn catalog_contains_deep_vector() {
        let q: Quiver = "n=6\narrows=5->3,3->4,4->5,3->2,2->5,2->1,1->0,0->2"
            .parse()
            .unwrap();
        let vc = classify_vatne(&q);
        let catalog = catalog_dvectors(&q, &vc).expect("catalog");
        let target = vec![1u8, 1, 2, 1, 1, 1];
        let hit = catalog.iter().find(|cv| cv.entries == target);
        assert!(hit.is_some(), "missing (1,1,2,1,1,1)");
        assert_eq!(hit.unwrap().provenance, "IV:family-XI");
    }

    #[test]
    fn triangulation_text_round_trip() {
        for t in [pentagon(), heptagon(), wheel(4)] {
            let text = t.to_string();
            let back: Triangulation = text.parse().expect("parse");
            assert_eq!(back, t);
        }
        let ccw: Triangulation = "n=5\nchord 3 1 ccw\nchord 0 3 ccw\nchord 0 1 ccw\nloop 0\nradius 0"
            .parse()
            .expect("ccw chords");
        assert_eq!(ccw, pentagon());
    }

    #[test]
    fn invalid_triangulations_rejected() {
        // Crossing chords.
        assert!(Triangulation::new(4, vec![chord(0, 2), chord(1, 2), radius(0), radius(1)]).is_err());
        // Loop without its radius.
        assert!(Triangulation::new(
            4,
            vec![Arc::Loop { foot: 0 }, chord(1, 2), chord(1, 3), radius(1)]
        )
        .is_err());
        // Wrong arc count.
        assert!(Triangulation::new(4, vec![radius(0)]).is_err());
    }
}
