use dn_dimer::dimer::*;
use dn_dimer::quiver::Quiver;
fn root(p: &mut Vec<usize>, mut x: usize) -> usize {
    while p[x] != x { p[x] = p[p[x]]; x = p[x]; }
    x
}
fn main() {
    let args: Vec<String> = std::env::args().collect();
    let qtext = args[1].replace(';', "\n");
    let d: Vec<u8> = args[2].split(',').map(|s| s.parse().unwrap()).collect();
    let q: Quiver = qtext.parse().unwrap();
    let model = dimer_model(&q, &d).unwrap();
    let g = &model.graph;
    let p = enumerate_poset(g, &d, &model.singular).unwrap();
    let nv = g.vertex_count();
    let pairs: Vec<(usize,usize)> = args[3].split_whitespace()
        .map(|s| { let mut it = s.split(','); (it.next().unwrap().parse().unwrap(), it.next().unwrap().parse().unwrap()) })
        .collect();
    for (u,v) in pairs {
        let mut sets = Vec::new();
        for el in &p.elements {
            let mut uf: Vec<usize> = (0..nv).collect();
            for (e2, &mm) in el.mult.iter().enumerate() {
                if mm > 0 {
                    let (a,b) = (g.edges[e2].black, g.edges[e2].white);
                    let (ra, rb) = (root(&mut uf, a), root(&mut uf, b));
                    if ra != rb { uf[ra.max(rb)] = ra.min(rb); }
                }
            }
            if root(&mut uf, u) == root(&mut uf, v) { sets.push(el.flips.clone()); }
        }
        println!("({u},{v}): {sets:?}");
    }
}
