use dn_dimer::quiver::Quiver;
use dn_dimer::dimer::*;
use std::collections::BTreeSet;

fn root(p: &mut Vec<usize>, mut x: usize) -> usize {
    while p[x] != x { p[x] = p[p[x]]; x = p[x]; }
    x
}

fn main() {
    let q: Quiver = "n=6\narrows=5->3,3->4,4->5,3->2,2->5,2->1,1->0,0->2".parse().unwrap();
    let d = [1u8,1,2,1,1,1];
    let model = dimer_model(&q, &d).unwrap();
    let g = &model.graph;
    let p = enumerate_poset(g, &d, &model.singular).unwrap();
    let bad: BTreeSet<Vec<u32>> = [
        [0,0,1,0,0,0],[1,0,1,0,0,0],[1,1,1,0,0,0],
        [0,0,1,1,1,1],[1,0,1,1,1,1],[1,1,1,1,1,1]
    ].iter().map(|v| v.to_vec()).collect();
    let nv = g.vertex_count();
    // for each element, connectivity
    let mut conn: Vec<Vec<Vec<bool>>> = Vec::new();
    for el in &p.elements {
        let mut uf: Vec<usize> = (0..nv).collect();
        for (e, &m) in el.mult.iter().enumerate() {
            if m > 0 {
                let (a,b) = (g.edges[e].black, g.edges[e].white);
                let (ra, rb) = (root(&mut uf, a), root(&mut uf, b));
                if ra != rb { uf[ra.max(rb)] = ra.min(rb); }
            }
        }
        let mut c = vec![vec![false; nv]; nv];
        for u in 0..nv { for v in 0..nv {
            c[u][v] = root(&mut uf, u) == root(&mut uf, v);
        }}
        conn.push(c);
    }
    // pair -> set of bad elements where connected, require no good elements connected
    for u in 0..nv { for v in u+1..nv {
        let mut hit: Vec<Vec<u32>> = Vec::new();
        let mut clean = true;
        for (i, el) in p.elements.iter().enumerate() {
            if conn[i][u][v] {
                if bad.contains(&el.flips) { hit.push(el.flips.clone()); }
                else { clean = false; }
            }
        }
        if clean && !hit.is_empty() {
            println!("pair ({u},{v}): covers {:?}", hit);
        }
    }}
}
