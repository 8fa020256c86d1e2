//! Quivers, quiver mutation, and recognition of the mutation class of `D_n`.
//!
//! A [`Quiver`] is a finite directed multigraph without loops or 2-cycles.
//! Quivers in the mutation class of the `D_n` Dynkin quiver take one of four
//! structural forms (types I-IV), recognized by [`classify_vatne`]:
//!
//! * **Type I** — two "fork" vertices `a`, `b` of degree one joined to a
//!   common vertex `c` (each arrow in either direction), with a single type-A
//!   part hanging off `c`.
//! * **Type II** — two oriented 3-cycles sharing one arrow `d -> c`
//!   (arrows `c->a, a->d, c->b, b->d, d->c`), with type-A parts attached at
//!   `c` and at `d`.
//! * **Type III** — an oriented 4-cycle `a->c->b->d->a`, with type-A parts
//!   attached at `c` and at `d`.
//! * **Type IV** — a central oriented `k`-cycle (`k >= 3`); some cycle arrows
//!   `u -> v` carry a "spike" vertex `s` forming an oriented 3-cycle
//!   `u->v, v->s, s->u`, and each spike may carry a type-A part.
//!
//! The attached type-A parts are quivers in the mutation class of `A_m`:
//! connected, no multiple arrows, every underlying cycle an oriented
//! 3-cycle, with the classical local degree conditions.  They need not be
//! acyclic.
//!
//! [`is_mutation_dn`] provides a slow, independent cross-check: a quiver is
//! in the class if and only if a mutation breadth-first search reaches a
//! linear Dynkin orientation of `D_n`.

use std::collections::{BTreeMap, BTreeSet, HashSet, VecDeque};
use std::fmt;
use std::str::FromStr;

use thiserror::Error;

/// Errors produced by quiver construction, parsing, and mutation.
#[derive(Debug, Error)]
pub enum QuiverError {
    /// An arrow endpoint was outside `0..n`.
    #[error("arrow endpoint {0} out of range for {1} vertices")]
    VertexOutOfRange(usize, usize),
    /// A loop `i -> i` was supplied.
    #[error("loop at vertex {0} is not allowed")]
    Loop(usize),
    /// Arrows `i -> j` and `j -> i` were both supplied.
    #[error("2-cycle between {0} and {1} is not allowed")]
    TwoCycle(usize, usize),
    /// Mutation was requested at a frozen or out-of-range vertex.
    #[error("vertex {0} is not mutable")]
    NotMutable(usize),
    /// The textual quiver format could not be parsed.
    #[error("parse error: {0}")]
    Parse(String),
}

/// A finite quiver on vertices `0..n` without loops or 2-cycles.
///
/// The last [`frozen`](Quiver::frozen) vertices are frozen: mutation at them
/// is forbidden and mutation never creates arrows between two frozen
/// vertices.  Arrows are stored as a sorted multiset of `(source, target)`
/// pairs so that structural equality is canonical.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Quiver {
    /// Total number of vertices (mutable and frozen).
    pub n: usize,
    /// Number of frozen vertices; these are the vertices `n - frozen .. n`.
    pub frozen: usize,
    arrows: Vec<(usize, usize)>,
}

impl Quiver {
    /// Builds a quiver from an arrow list, validating the loop-free and
    /// 2-cycle-free invariants.
    pub fn new(n: usize, arrows: Vec<(usize, usize)>) -> Result<Self, QuiverError> {
        Self::with_frozen(n, 0, arrows)
    }

    /// Builds a quiver whose last `frozen` vertices are frozen.
    pub fn with_frozen(
        n: usize,
        frozen: usize,
        mut arrows: Vec<(usize, usize)>,
    ) -> Result<Self, QuiverError> {
        for &(s, t) in &arrows {
            if s >= n {
                return Err(QuiverError::VertexOutOfRange(s, n));
            }
            if t >= n {
                return Err(QuiverError::VertexOutOfRange(t, n));
            }
            if s == t {
                return Err(QuiverError::Loop(s));
            }
        }
        let pairs: HashSet<(usize, usize)> = arrows.iter().copied().collect();
        for &(s, t) in &arrows {
            if pairs.contains(&(t, s)) {
                return Err(QuiverError::TwoCycle(s.min(t), s.max(t)));
            }
        }
        arrows.sort_unstable();
        Ok(Quiver { n, frozen, arrows })
    }

    /// The sorted arrow multiset.
    pub fn arrows(&self) -> &[(usize, usize)] {
        &self.arrows
    }

    /// Number of mutable vertices.
    pub fn mutable(&self) -> usize {
        self.n - self.frozen
    }

    /// Whether vertex `v` is mutable.
    pub fn is_mutable(&self, v: usize) -> bool {
        v < self.n - self.frozen
    }

    /// Number of arrows from `i` to `j` (directed).
    pub fn arrow_mult(&self, i: usize, j: usize) -> usize {
        self.arrows.iter().filter(|&&(s, t)| s == i && t == j).count()
    }

    /// All arrows leaving `i`.
    pub fn arrows_from(&self, i: usize) -> impl Iterator<Item = usize> + '_ {
        self.arrows
            .iter()
            .filter(move |&&(s, _)| s == i)
            .map(|&(_, t)| t)
    }

    /// All arrows entering `j`.
    pub fn arrows_into(&self, j: usize) -> impl Iterator<Item = usize> + '_ {
        self.arrows
            .iter()
            .filter(move |&&(_, t)| t == j)
            .map(|&(s, _)| s)
    }

    /// Total degree (in plus out) of vertex `v`.
    pub fn degree(&self, v: usize) -> usize {
        self.arrows
            .iter()
            .filter(|&&(s, t)| s == v || t == v)
            .count()
    }

    /// Undirected neighbor set of `v`.
    pub fn neighbors(&self, v: usize) -> BTreeSet<usize> {
        self.arrows
            .iter()
            .filter_map(|&(s, t)| {
                if s == v {
                    Some(t)
                } else if t == v {
                    Some(s)
                } else {
                    None
                }
            })
            .collect()
    }

    /// Whether there is an arrow between `i` and `j` in either direction.
    pub fn adjacent(&self, i: usize, j: usize) -> bool {
        self.arrow_mult(i, j) > 0 || self.arrow_mult(j, i) > 0
    }

    /// Mutates the quiver at vertex `k` via the three-step rule: add an
    /// arrow `i -> j` for every 2-path `i -> k -> j`, reverse every arrow
    /// incident to `k`, then cancel 2-cycles pairwise.  Arrows between two
    /// frozen vertices are discarded.
    pub fn mutate(&self, k: usize) -> Result<Quiver, QuiverError> {
        if k >= self.n || !self.is_mutable(k) {
            return Err(QuiverError::NotMutable(k));
        }
        let mut new_arrows: Vec<(usize, usize)> = Vec::new();
        let sources: Vec<usize> = self.arrows_into(k).collect();
        let targets: Vec<usize> = self.arrows_from(k).collect();
        for &(s, t) in &self.arrows {
            if s == k {
                new_arrows.push((t, k));
            } else if t == k {
                new_arrows.push((k, s));
            } else {
                new_arrows.push((s, t));
            }
        }
        for &i in &sources {
            for &j in &targets {
                if i != j {
                    new_arrows.push((i, j));
                }
            }
        }
        // Cancel 2-cycles pairwise and drop frozen-frozen arrows.
        let frozen_from = self.n - self.frozen;
        let mut mult: BTreeMap<(usize, usize), isize> = BTreeMap::new();
        for (s, t) in new_arrows {
            if s >= frozen_from && t >= frozen_from {
                continue;
            }
            if let Some(m) = mult.get_mut(&(t, s)) {
                if *m > 0 {
                    *m -= 1;
                    continue;
                }
            }
            *mult.entry((s, t)).or_insert(0) += 1;
        }
        let mut arrows = Vec::new();
        for ((s, t), m) in mult {
            for _ in 0..m {
                arrows.push((s, t));
            }
        }
        Ok(Quiver {
            n: self.n,
            frozen: self.frozen,
            arrows,
        })
    }

    /// Returns the framed quiver: `n` new frozen vertices `n .. 2n`, one
    /// arrow `n + i -> i` per mutable vertex `i`, original arrows kept.
    pub fn frame(&self) -> Quiver {
        assert_eq!(self.frozen, 0, "quiver is already framed");
        let mut arrows = self.arrows.clone();
        for i in 0..self.n {
            arrows.push((self.n + i, i));
        }
        arrows.sort_unstable();
        Quiver {
            n: 2 * self.n,
            frozen: self.n,
            arrows,
        }
    }

    /// Restricts the quiver to `keep`, relabeling the kept vertices in
    /// increasing order.  Returns the subquiver together with the
    /// new-to-old vertex map (index = new label, value = old label).
    pub fn induced_subquiver(&self, keep: &BTreeSet<usize>) -> (Quiver, Vec<usize>) {
        let old_of_new: Vec<usize> = keep.iter().copied().collect();
        let mut new_of_old: BTreeMap<usize, usize> = BTreeMap::new();
        for (new, &old) in old_of_new.iter().enumerate() {
            new_of_old.insert(old, new);
        }
        let arrows = self
            .arrows
            .iter()
            .filter_map(|&(s, t)| Some((*new_of_old.get(&s)?, *new_of_old.get(&t)?)))
            .collect();
        (
            Quiver {
                n: old_of_new.len(),
                frozen: 0,
                arrows,
            },
            old_of_new,
        )
    }

    /// All directed simple cycles, each rotated so its smallest vertex comes
    /// first, sorted by (length, vertex sequence).
    pub fn oriented_cycles(&self) -> Vec<Vec<usize>> {
        let mut cycles: BTreeSet<(usize, Vec<usize>)> = BTreeSet::new();
        // Search cycles whose minimum vertex is `start`, visiting only
        // vertices >= start so each cycle is found in canonical rotation.
        for start in 0..self.n {
            let mut stack = vec![start];
            let mut on_path = vec![false; self.n];
            on_path[start] = true;
            self.cycle_dfs(start, start, &mut stack, &mut on_path, &mut cycles);
        }
        cycles.into_iter().map(|(_, c)| c).collect()
    }

    fn cycle_dfs(
        &self,
        start: usize,
        v: usize,
        stack: &mut Vec<usize>,
        on_path: &mut Vec<bool>,
        out: &mut BTreeSet<(usize, Vec<usize>)>,
    ) {
        let succs: Vec<usize> = self.arrows_from(v).collect();
        for w in succs {
            if w == start && stack.len() >= 2 {
                out.insert((stack.len(), stack.clone()));
            } else if w > start && !on_path[w] {
                stack.push(w);
                on_path[w] = true;
                self.cycle_dfs(start, w, stack, on_path, out);
                stack.pop();
                on_path[w] = false;
            }
        }
    }

    /// Whether the underlying undirected graph is connected (vacuously true
    /// for the empty quiver).
    pub fn is_connected(&self) -> bool {
        if self.n == 0 {
            return true;
        }
        let mut seen = vec![false; self.n];
        let mut queue = VecDeque::from([0usize]);
        seen[0] = true;
        while let Some(v) = queue.pop_front() {
            for w in self.neighbors(v) {
                if !seen[w] {
                    seen[w] = true;
                    queue.push_back(w);
                }
            }
        }
        seen.into_iter().all(|s| s)
    }
}

impl fmt::Display for Quiver {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "n={}", self.n)?;
        let parts: Vec<String> = self
            .arrows
            .iter()
            .map(|&(s, t)| format!("{s}->{t}"))
            .collect();
        write!(f, "arrows={}", parts.join(","))
    }
}

impl FromStr for Quiver {
    type Err = QuiverError;

    /// Parses the textual format: a line `n=<int>` followed by a line
    /// `arrows=<src>-><tgt>[,<src>-><tgt>...]` (possibly empty);
    /// whitespace-insensitive.
    fn from_str(s: &str) -> Result<Self, QuiverError> {
        // Whitespace-insensitive: strip it all, then recover fields by
        // keyword (arrow text is only digits, `-`, `>`, `,`).
        let compact: String = s.chars().filter(|c| !c.is_whitespace()).collect();
        let n_pos = compact
            .find("n=")
            .ok_or_else(|| QuiverError::Parse("missing `n=`".into()))?;
        let arrows_pos = compact
            .find("arrows=")
            .ok_or_else(|| QuiverError::Parse("missing `arrows=`".into()))?;
        if n_pos >= arrows_pos {
            return Err(QuiverError::Parse("`n=` must precede `arrows=`".into()));
        }
        let n_str = &compact[n_pos + 2..arrows_pos];
        let n: usize = n_str
            .parse()
            .map_err(|_| QuiverError::Parse(format!("bad vertex count `{n_str}`")))?;
        let arrow_str = &compact[arrows_pos + 7..];
        let mut arrows = Vec::new();
        if !arrow_str.is_empty() {
            for part in arrow_str.split(',') {
                let (s_str, t_str) = part
                    .split_once("->")
                    .ok_or_else(|| QuiverError::Parse(format!("bad arrow `{part}`")))?;
                let s: usize = s_str
                    .parse()
                    .map_err(|_| QuiverError::Parse(format!("bad source `{s_str}`")))?;
                let t: usize = t_str
                    .parse()
                    .map_err(|_| QuiverError::Parse(format!("bad target `{t_str}`")))?;
                arrows.push((s, t));
            }
        }
        Quiver::new(n, arrows)
    }
}

/// One of the four structural forms of a type `D_n` quiver, or `NotTypeD`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum VatneType {
    I,
    II,
    III,
    IV,
    NotTypeD,
}

impl fmt::Display for VatneType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            VatneType::I => "I",
            VatneType::II => "II",
            VatneType::III => "III",
            VatneType::IV => "IV",
            VatneType::NotTypeD => "NotTypeD",
        };
        write!(f, "{s}")
    }
}

/// Structural role of a vertex inside a type `D_n` quiver.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Role {
    /// Fork vertex `a` (types I-III).
    A,
    /// Fork vertex `b` (types I-III).
    B,
    /// Attachment vertex `c`.
    C,
    /// Attachment vertex `d` (types II, III).
    D,
    /// Vertex of the central oriented cycle (type IV).
    CentralCycle,
    /// Spike vertex attached to a central-cycle arrow (type IV).
    Spike,
    /// Vertex of the `k`-th attached type-A part.
    TypeAPart(usize),
}

impl fmt::Display for Role {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Role::A => write!(f, "a"),
            Role::B => write!(f, "b"),
            Role::C => write!(f, "c"),
            Role::D => write!(f, "d"),
            Role::CentralCycle => write!(f, "central-cycle"),
            Role::Spike => write!(f, "spike"),
            Role::TypeAPart(k) => write!(f, "typeA-part-{k}"),
        }
    }
}

/// Result of classifying a quiver against the four type `D_n` forms.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VatneClass {
    /// Which of the four forms matched, or `NotTypeD`.
    pub type_tag: VatneType,
    /// Vertex roles; covers every vertex when `type_tag != NotTypeD`.
    pub role_map: BTreeMap<usize, Role>,
    /// For type IV: the central cycle in canonical rotation.
    pub central_cycle: Vec<usize>,
    /// For type IV: spike vertex per central-cycle arrow, keyed by the arrow.
    pub spikes: BTreeMap<(usize, usize), usize>,
}

impl VatneClass {
    fn not_type_d() -> Self {
        VatneClass {
            type_tag: VatneType::NotTypeD,
            role_map: BTreeMap::new(),
            central_cycle: Vec::new(),
            spikes: BTreeMap::new(),
        }
    }
}

/// Whether `q` is in the mutation class of `A_m` (the shape every attached
/// part must have): connected, no multiple arrows, every block of the
/// underlying graph a single edge or an oriented 3-cycle, and the classical
/// degree-3/degree-4 conditions.  The empty quiver qualifies.
pub fn is_type_a_shape(q: &Quiver) -> bool {
    if q.n == 0 {
        return true;
    }
    if !q.is_connected() {
        return false;
    }
    // No multiple arrows.
    for i in 0..q.n {
        for j in 0..q.n {
            if q.arrow_mult(i, j) > 1 {
                return false;
            }
        }
    }
    let cycles = q.oriented_cycles();
    if cycles.iter().any(|c| c.len() != 3) {
        return false;
    }
    // Every underlying cycle must be one of the oriented 3-cycles: the number
    // of independent cycles of the underlying graph (edges - vertices + 1 for
    // a connected graph) must equal the number of oriented 3-cycles, and the
    // 3-cycles must be edge-disjoint.
    let cycle_rank = q.arrows().len() + 1 - q.n;
    if cycles.len() != cycle_rank {
        return false;
    }
    let mut cycle_edges: HashSet<(usize, usize)> = HashSet::new();
    for c in &cycles {
        for i in 0..3 {
            let e = (c[i], c[(i + 1) % 3]);
            if !cycle_edges.insert(e) {
                return false;
            }
        }
    }
    // Degree conditions.
    for v in 0..q.n {
        let deg = q.degree(v);
        if deg > 4 {
            return false;
        }
        let in_cycles = cycles.iter().filter(|c| c.contains(&v)).count();
        match deg {
            4 => {
                if in_cycles != 2 {
                    return false;
                }
            }
            3 => {
                if in_cycles != 1 {
                    return false;
                }
            }
            _ => {}
        }
    }
    true
}

/// Helper: the induced subquiver on `keep`, plus the map back to old labels.
fn sub(q: &Quiver, keep: &BTreeSet<usize>) -> (Quiver, Vec<usize>) {
    q.induced_subquiver(keep)
}

/// Checks the local condition at an attachment vertex `v` inside its type-A
/// part `part` (labels of `part` are the old quiver labels via `old_of_new`):
/// the attachment vertex has degree at most 2 there, and if exactly 2 its
/// two arrows lie on a common oriented 3-cycle.
fn attachment_ok(part: &Quiver, old_of_new: &[usize], v: usize) -> bool {
    let Some(pv) = old_of_new.iter().position(|&o| o == v) else {
        return false;
    };
    let deg = part.degree(pv);
    if deg > 2 {
        return false;
    }
    if deg == 2 {
        return part.oriented_cycles().iter().any(|c| c.contains(&pv));
    }
    true
}

/// Pattern-matches `q` against the four type `D_n` forms.  Returns
/// `NotTypeD` when no form matches (including all `n < 4` inputs).
pub fn classify_vatne(q: &Quiver) -> VatneClass {
    if q.n < 4 || !q.is_connected() || q.frozen != 0 {
        return VatneClass::not_type_d();
    }
    if let Some(c) = try_type_i(q) {
        return c;
    }
    if let Some(c) = try_type_ii(q) {
        return c;
    }
    if let Some(c) = try_type_iii(q) {
        return c;
    }
    if let Some(c) = try_type_iv(q) {
        return c;
    }
    VatneClass::not_type_d()
}

fn try_type_i(q: &Quiver) -> Option<VatneClass> {
    // Find degree-1 vertices sharing a neighbor.
    let leaves: Vec<usize> = (0..q.n).filter(|&v| q.degree(v) == 1).collect();
    for (idx, &a) in leaves.iter().enumerate() {
        for &b in &leaves[idx + 1..] {
            let ca = *q.neighbors(a).iter().next().unwrap();
            let cb = *q.neighbors(b).iter().next().unwrap();
            if ca != cb {
                continue;
            }
            let c = ca;
            let keep: BTreeSet<usize> = (0..q.n).filter(|&v| v != a && v != b).collect();
            let (part, old) = sub(q, &keep);
            if !is_type_a_shape(&part) || !attachment_ok(&part, &old, c) {
                continue;
            }
            let mut role_map = BTreeMap::new();
            role_map.insert(a, Role::A);
            role_map.insert(b, Role::B);
            role_map.insert(c, Role::C);
            for &v in &keep {
                if v != c {
                    role_map.insert(v, Role::TypeAPart(0));
                }
            }
            return Some(VatneClass {
                type_tag: VatneType::I,
                role_map,
                central_cycle: Vec::new(),
                spikes: BTreeMap::new(),
            });
        }
    }
    None
}

fn try_type_ii(q: &Quiver) -> Option<VatneClass> {
    // Look for the shared arrow d -> c of the two glued 3-cycles.
    for &(d, c) in q.arrows() {
        let a_candidates: Vec<usize> = (0..q.n)
            .filter(|&v| {
                v != c && v != d && q.degree(v) == 2 && q.arrow_mult(c, v) == 1 && q.arrow_mult(v, d) == 1
            })
            .collect();
        for (i, &a) in a_candidates.iter().enumerate() {
            for &b in &a_candidates[i + 1..] {
                let keep: BTreeSet<usize> =
                    (0..q.n).filter(|&v| v != a && v != b).collect();
                let (rest, old) = sub(q, &keep);
                // The rest must be a type-A shape containing the arrow d->c,
                // with c and d each carrying at most one further arrow.
                if !is_type_a_shape(&rest) {
                    continue;
                }
                if q.degree(c) > 4 || q.degree(d) > 4 {
                    continue;
                }
                // Split the rest at the arrow d->c to number the two parts:
                // part 0 holds vertices closer to c, part 1 closer to d.
                let mut role_map = BTreeMap::new();
                role_map.insert(a, Role::A);
                role_map.insert(b, Role::B);
                role_map.insert(c, Role::C);
                role_map.insert(d, Role::D);
                let mut ok = true;
                for &v in &keep {
                    if v == c || v == d {
                        continue;
                    }
                    let part = part_of(&rest, &old, v, c, d);
                    match part {
                        Some(p) => {
                            role_map.insert(v, Role::TypeAPart(p));
                        }
                        None => {
                            ok = false;
                            break;
                        }
                    }
                }
                if !ok {
                    continue;
                }
                return Some(VatneClass {
                    type_tag: VatneType::II,
                    role_map,
                    central_cycle: Vec::new(),
                    spikes: BTreeMap::new(),
                });
            }
        }
    }
    None
}

fn try_type_iii(q: &Quiver) -> Option<VatneClass> {
    // Oriented 4-cycle a->c->b->d->a with deg(a) = deg(b) = 2.
    for cyc in q.oriented_cycles() {
        if cyc.len() != 4 {
            continue;
        }
        // Two choices of which opposite pair plays (a, b).
        for off in 0..2 {
            let a = cyc[off];
            let c = cyc[off + 1];
            let b = cyc[off + 2];
            let d = cyc[(off + 3) % 4];
            if q.degree(a) != 2 || q.degree(b) != 2 {
                continue;
            }
            let keep: BTreeSet<usize> = (0..q.n).filter(|&v| v != a && v != b).collect();
            let (rest, old) = sub(q, &keep);
            // Removing a and b must disconnect c from d, each side a type-A
            // shape with a valid attachment at c resp. d.
            let comps = components(&rest);
            if comps.len() != 2 {
                continue;
            }
            let pc = old.iter().position(|&o| o == c).unwrap();
            let pd = old.iter().position(|&o| o == d).unwrap();
            let (comp_c, comp_d) = if comps[0].contains(&pc) {
                (&comps[0], &comps[1])
            } else {
                (&comps[1], &comps[0])
            };
            if !comp_c.contains(&pc) || !comp_d.contains(&pd) {
                continue;
            }
            let keep_c: BTreeSet<usize> = comp_c.iter().map(|&v| old[v]).collect();
            let keep_d: BTreeSet<usize> = comp_d.iter().map(|&v| old[v]).collect();
            let (part_c, old_c) = sub(q, &keep_c);
            let (part_d, old_d) = sub(q, &keep_d);
            if !is_type_a_shape(&part_c)
                || !is_type_a_shape(&part_d)
                || !attachment_ok(&part_c, &old_c, c)
                || !attachment_ok(&part_d, &old_d, d)
            {
                continue;
            }
            let mut role_map = BTreeMap::new();
            role_map.insert(a, Role::A);
            role_map.insert(b, Role::B);
            role_map.insert(c, Role::C);
            role_map.insert(d, Role::D);
            for &v in &keep_c {
                if v != c {
                    role_map.insert(v, Role::TypeAPart(0));
                }
            }
            for &v in &keep_d {
                if v != d {
                    role_map.insert(v, Role::TypeAPart(1));
                }
            }
            return Some(VatneClass {
                type_tag: VatneType::III,
                role_map,
                central_cycle: Vec::new(),
                spikes: BTreeMap::new(),
            });
        }
    }
    None
}

fn try_type_iv(q: &Quiver) -> Option<VatneClass> {
    'cycles: for cyc in q.oriented_cycles() {
        let k = cyc.len();
        if k < 3 {
            continue;
        }
        let cyc_set: BTreeSet<usize> = cyc.iter().copied().collect();
        if cyc_set.len() != k {
            continue;
        }
        // Candidate central cycle.  Identify spikes: for each cycle arrow
        // u -> v, an optional vertex s outside the cycle with v -> s, s -> u.
        let mut spikes: BTreeMap<(usize, usize), usize> = BTreeMap::new();
        let mut spike_set: BTreeSet<usize> = BTreeSet::new();
        for i in 0..k {
            let u = cyc[i];
            let v = cyc[(i + 1) % k];
            if q.arrow_mult(u, v) != 1 {
                continue 'cycles;
            }
            let cands: Vec<usize> = (0..q.n)
                .filter(|&s| {
                    !cyc_set.contains(&s)
                        && q.arrow_mult(v, s) == 1
                        && q.arrow_mult(s, u) == 1
                })
                .collect();
            match cands.len() {
                0 => {}
                1 => {
                    spikes.insert((u, v), cands[0]);
                    spike_set.insert(cands[0]);
                }
                _ => continue 'cycles,
            }
        }
        // Cycle vertices must have no arrows beyond the cycle and spikes.
        for &v in &cyc_set {
            let expected = 2 + spikes
                .iter()
                .filter(|&(&(u, w), _)| u == v || w == v)
                .count();
            if q.degree(v) != expected {
                continue 'cycles;
            }
        }
        // Remove the cycle; every component must contain exactly one spike
        // vertex, be a type-A shape, and attach correctly at the spike.
        let keep: BTreeSet<usize> = (0..q.n).filter(|v| !cyc_set.contains(v)).collect();
        if keep.is_empty() && spike_set.is_empty() {
            // Bare oriented cycle.
            let role_map = cyc.iter().map(|&v| (v, Role::CentralCycle)).collect();
            return Some(VatneClass {
                type_tag: VatneType::IV,
                role_map,
                central_cycle: cyc.clone(),
                spikes,
            });
        }
        let (rest, old) = sub(q, &keep);
        let comps = components(&rest);
        let mut role_map: BTreeMap<usize, Role> = BTreeMap::new();
        for &v in &cyc_set {
            role_map.insert(v, Role::CentralCycle);
        }
        // Spikes numbered by position of their cycle arrow along `cyc`.
        let spike_index: BTreeMap<usize, usize> = (0..k)
            .filter_map(|i| {
                let u = cyc[i];
                let v = cyc[(i + 1) % k];
                spikes.get(&(u, v)).map(|&s| (s, i))
            })
            .collect();
        for comp in &comps {
            let comp_old: BTreeSet<usize> = comp.iter().map(|&v| old[v]).collect();
            let spikes_here: Vec<usize> = comp_old
                .iter()
                .copied()
                .filter(|s| spike_set.contains(s))
                .collect();
            if spikes_here.len() != 1 {
                continue 'cycles;
            }
            let s = spikes_here[0];
            let (part, old_p) = sub(q, &comp_old);
            if !is_type_a_shape(&part) || !attachment_ok(&part, &old_p, s) {
                continue 'cycles;
            }
            let pk = spike_index[&s];
            for &v in &comp_old {
                if v == s {
                    role_map.insert(v, Role::Spike);
                } else {
                    role_map.insert(v, Role::TypeAPart(pk));
                }
            }
        }
        if role_map.len() != q.n {
            continue 'cycles;
        }
        return Some(VatneClass {
            type_tag: VatneType::IV,
            role_map,
            central_cycle: cyc.clone(),
            spikes,
        });
    }
    None
}

/// Connected components of the underlying graph, as vertex sets.
fn components(q: &Quiver) -> Vec<BTreeSet<usize>> {
    let mut seen = vec![false; q.n];
    let mut comps = Vec::new();
    for start in 0..q.n {
        if seen[start] {
            continue;
        }
        let mut comp = BTreeSet::new();
        let mut queue = VecDeque::from([start]);
        seen[start] = true;
        while let Some(v) = queue.pop_front() {
            comp.insert(v);
            for w in q.neighbors(v) {
                if !seen[w] {
                    seen[w] = true;
                    queue.push_back(w);
                }
            }
        }
        comps.push(comp);
    }
    comps
}

/// For type II: decides whether old-label vertex `v` of `rest` (the quiver
/// with a, b removed) belongs to the part at `c` (0) or at `d` (1), by
/// reachability avoiding the other attachment vertex.  Returns `None` when
/// `v` reaches both or neither, which disqualifies the candidate split.
fn part_of(rest: &Quiver, old: &[usize], v: usize, c: usize, d: usize) -> Option<usize> {
    let pv = old.iter().position(|&o| o == v)?;
    let pc = old.iter().position(|&o| o == c)?;
    let pd = old.iter().position(|&o| o == d)?;
    let reach = |from: usize, avoid: usize, goal: usize| -> bool {
        let mut seen = vec![false; rest.n];
        let mut queue = VecDeque::from([from]);
        seen[from] = true;
        seen[avoid] = true;
        while let Some(x) = queue.pop_front() {
            if x == goal {
                return true;
            }
            for w in rest.neighbors(x) {
                if !seen[w] {
                    seen[w] = true;
                    queue.push_back(w);
                }
            }
        }
        false
    };
    let to_c = pv == pc || reach(pv, pd, pc);
    let to_d = pv == pd || reach(pv, pc, pd);
    match (to_c, to_d) {
        (true, false) => Some(0),
        (false, true) => Some(1),
        _ => None,
    }
}

/// Slow validator: breadth-first search over the labeled mutation class of
/// `q`, returning `true` if a linear Dynkin orientation of `D_n` (a fork
/// `a, b -> c` continued by an alternating-free path... any orientation of
/// the `D_n` Dynkin diagram) is reached.  Intended for `n <= 6`.
pub fn is_mutation_dn(q: &Quiver) -> bool {
    if q.n < 4 {
        return false;
    }
    let mut seen: HashSet<Quiver> = HashSet::new();
    let mut queue = VecDeque::from([q.clone()]);
    seen.insert(q.clone());
    while let Some(cur) = queue.pop_front() {
        if is_dn_dynkin_orientation(&cur) {
            return true;
        }
        for k in 0..cur.n {
            let next = cur.mutate(k).expect("mutable vertex");
            if !seen.contains(&next) {
                seen.insert(next.clone());
                queue.push_back(next);
            }
        }
    }
    false
}

/// Whether `q` is an orientation of the `D_n` Dynkin diagram: underlying
/// graph a path with two extra leaves attached at one end's neighbor.
fn is_dn_dynkin_orientation(q: &Quiver) -> bool {
    if q.n < 4 || q.arrows().len() != q.n - 1 {
        return false;
    }
    // Tree with degree sequence: one vertex of degree 3, three leaves, rest
    // degree 2, and the degree-3 vertex adjacent to at least two leaves.
    let degs: Vec<usize> = (0..q.n).map(|v| q.degree(v)).collect();
    if degs.iter().any(|&d| d == 0 || d > 3) {
        return false;
    }
    let deg3: Vec<usize> = (0..q.n).filter(|&v| degs[v] == 3).collect();
    let leaves: Vec<usize> = (0..q.n).filter(|&v| degs[v] == 1).collect();
    if deg3.len() != 1 || leaves.len() != 3 {
        return false;
    }
    if !q.is_connected() {
        return false;
    }
    let c = deg3[0];
    let leaf_neighbors = leaves.iter().filter(|&&l| q.adjacent(l, c)).count();
    leaf_neighbors >= 2
}

#[cfg(test)]
mod tests {
    use super::*;

    fn quiver(n: usize, arrows: &[(usize, usize)]) -> Quiver {
        Quiver::new(n, arrows.to_vec()).unwrap()
    }

    #[test]
    fn mutate_path_makes_cycle() {
        // 1->2->3 on vertices {1,2,3} of a 4-vertex quiver, mutate at 2.
        let q = quiver(4, &[(1, 2), (2, 3)]);
        let m = q.mutate(2).unwrap();
        assert_eq!(m.arrows(), &[(1, 3), (2, 1), (3, 2)]);
    }

    #[test]
    fn mutation_is_involutive() {
        let q = quiver(5, &[(0, 2), (1, 2), (2, 3), (4, 3)]);
        for k in 0..5 {
            assert_eq!(q.mutate(k).unwrap().mutate(k).unwrap(), q);
        }
    }

    #[test]
    fn mutate_cycle_cancels_two_cycle() {
        let q = quiver(4, &[(1, 2), (2, 3), (3, 1)]);
        let m = q.mutate(1).unwrap();
        assert_eq!(m.arrows(), &[(1, 3), (2, 1)]);
    }

    #[test]
    fn frame_a2() {
        let q = quiver(2, &[(0, 1)]);
        let f = q.frame();
        assert_eq!(f.n, 4);
        assert_eq!(f.frozen, 2);
        assert_eq!(f.arrows(), &[(0, 1), (2, 0), (3, 1)]);
        assert!(!f.is_mutable(2));
    }

    #[test]
    fn frame_single_vertex() {
        let q = quiver(1, &[]);
        let f = q.frame();
        assert_eq!(f.arrows(), &[(1, 0)]);
    }

    #[test]
    fn classify_linear_d4() {
        let q = quiver(4, &[(0, 2), (1, 2), (2, 3)]);
        let c = classify_vatne(&q);
        assert_eq!(c.type_tag, VatneType::I);
        assert_eq!(c.role_map[&2], Role::C);
        assert!(matches!(c.role_map[&0], Role::A | Role::B));
    }

    #[test]
    fn classify_oriented_4_cycle_as_type_iii() {
        let q = quiver(4, &[(0, 1), (1, 2), (2, 3), (3, 0)]);
        let c = classify_vatne(&q);
        assert_eq!(c.type_tag, VatneType::III);
    }

    #[test]
    fn classify_a4_path_as_not_type_d() {
        let q = quiver(4, &[(0, 1), (1, 2), (2, 3)]);
        assert_eq!(classify_vatne(&q).type_tag, VatneType::NotTypeD);
    }

    #[test]
    fn oriented_cycles_canonical() {
        let q = quiver(4, &[(1, 2), (2, 3), (3, 1)]);
        assert_eq!(q.oriented_cycles(), vec![vec![1, 2, 3]]);
        let acyclic = quiver(3, &[(0, 1), (1, 2)]);
        assert!(acyclic.oriented_cycles().is_empty());
    }

    #[test]
    fn induced_subquiver_identity_and_restriction() {
        let q = quiver(3, &[(0, 1), (1, 2), (2, 0)]);
        let all: BTreeSet<usize> = (0..3).collect();
        assert_eq!(q.induced_subquiver(&all).0, q);
        let keep: BTreeSet<usize> = [0, 1].into_iter().collect();
        let (s, old) = q.induced_subquiver(&keep);
        assert_eq!(s.arrows(), &[(0, 1)]);
        assert_eq!(old, vec![0, 1]);
        let empty = q.induced_subquiver(&BTreeSet::new()).0;
        assert_eq!(empty.n, 0);
    }

    #[test]
    fn round_trip_text_format() {
        let q = quiver(4, &[(0, 2), (1, 2), (2, 3)]);
        let text = q.to_string();
        let back: Quiver = text.parse().unwrap();
        assert_eq!(back, q);
        assert_eq!(back.to_string(), text);
        // Whitespace-insensitive.
        let spaced: Quiver = "n = 4\narrows = 0 -> 2 , 1 -> 2, 2->3".parse().unwrap();
        assert_eq!(spaced, q);
    }

    #[test]
    fn mutation_bfs_agrees_with_classifier_on_d4_class() {
        let start = quiver(4, &[(0, 2), (1, 2), (2, 3)]);
        let mut seen = HashSet::new();
        let mut queue = VecDeque::from([start.clone()]);
        seen.insert(start);
        while let Some(cur) = queue.pop_front() {
            assert_ne!(
                classify_vatne(&cur).type_tag,
                VatneType::NotTypeD,
                "mutation-class member misclassified: {cur}"
            );
            for k in 0..4 {
                let next = cur.mutate(k).unwrap();
                if seen.insert(next.clone()) {
                    queue.push_back(next);
                }
            }
        }
        // Negative control: the A_4 class never classifies as type D.
        let a4 = quiver(4, &[(0, 1), (1, 2), (2, 3)]);
        let mut seen = HashSet::new();
        let mut queue = VecDeque::from([a4.clone()]);
        seen.insert(a4);
        while let Some(cur) = queue.pop_front() {
            assert_eq!(classify_vatne(&cur).type_tag, VatneType::NotTypeD);
            for k in 0..4 {
                let next = cur.mutate(k).unwrap();
                if seen.insert(next.clone()) {
                    queue.push_back(next);
                }
            }
        }
    }

    #[test]
    fn type_iv_with_spike_and_tail() {
        // Central 3-cycle 5->3, 3->4, 4->5; spike 2 on the arrow 5->3;
        // a further 3-cycle 2->1, 1->0, 0->2 in the attached part.
        let q = quiver(
            6,
            &[(5, 3), (3, 4), (4, 5), (3, 2), (2, 5), (2, 1), (1, 0), (0, 2)],
        );
        let c = classify_vatne(&q);
        assert_eq!(c.type_tag, VatneType::IV);
        assert_eq!(c.role_map[&2], Role::Spike);
        assert_eq!(c.central_cycle, vec![3, 4, 5]);
        assert!(is_mutation_dn(&q));
    }
}
