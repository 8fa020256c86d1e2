use dn_dimer::quiver::Quiver;
use dn_dimer::dimer::*;

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
    let nv = g.vertex_count();
    for pair in [(2usize,9usize),(1,8),(2,8),(0,8),(0,9),(1,9)] {
        let mut sets = Vec::new();
        for el in &p.elements {
            let mut uf: Vec<usize> = (0..nv).collect();
            for (e, &m) in el.mult.iter().enumerate() {
                if m > 0 {
                    let (a,b) = (g.edges[e].black, g.edges[e].white);
                    let (ra, rb) = (root(&mut uf, a), root(&mut uf, b));
                    if ra != rb { uf[ra.max(rb)] = ra.min(rb); }
                }
            }
            if root(&mut uf, pair.0) == root(&mut uf, pair.1) {
                sets.push(el.flips.clone());
            }
        }
        println!("pair {pair:?}: {sets:?}");
    }
}
