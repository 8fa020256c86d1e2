use dn_dimer::dimer::*;
use dn_dimer::jacobian::{grassmannian_point_count, module_from_arc};
use dn_dimer::poly::FPolynomial;
use dn_dimer::quiver::Quiver;
use dn_dimer::surface::{all_tagged_arcs, crossing_vector, realize_triangulation};
use std::collections::BTreeSet;

fn root(p: &mut Vec<usize>, mut x: usize) -> usize {
    while p[x] != x { p[x] = p[p[x]]; x = p[x]; }
    x
}

fn main() {
    let args: Vec<String> = std::env::args().collect();
    let qtext = args[1].replace(';', "\n");
    let d: Vec<u8> = args[2].split(',').map(|s| s.parse().unwrap()).collect();
    let q: Quiver = qtext.parse().unwrap();
    let t = realize_triangulation(&q).unwrap();
    let arc = all_tagged_arcs(t.n).into_iter().find(|g| crossing_vector(&t, g) == d).unwrap();
    let m = module_from_arc(&t, &arc).unwrap();
    // truth support
    let mut truth = FPolynomial::zero(q.n);
    let mut e = vec![0usize; q.n];
    loop {
        let a = grassmannian_point_count(&m, &e, 2).unwrap() as i64;
        let b = grassmannian_point_count(&m, &e, 3).unwrap() as i64;
        let c = grassmannian_point_count(&m, &e, 5).unwrap() as i64;
        let num = 8 * a - 6 * b + c;
        let chi = num / 3;
        if chi != 0 {
            let expo: Vec<u32> = e.iter().map(|&x| x as u32).collect();
            truth.add_term(&expo, chi);
        }
        let mut pos = 0;
        loop {
            if pos == q.n { break; }
            e[pos] += 1;
            if e[pos] <= m.dims[pos] as usize { break; }
            e[pos] = 0;
            pos += 1;
        }
        if pos == q.n { break; }
    }
    let model = dimer_model(&q, &d).unwrap();
    let g = &model.graph;
    println!("singular: {:?}", model.singular);
    println!("nodes placed: {:?}", g.nodes);
    for (i, tl) in g.tiles.iter().enumerate() {
        let vs: Vec<String> = tl.iter().map(|&(e2,bw)| {
            let ed = &g.edges[e2];
            let (a,b) = if bw {(ed.black, ed.white)} else {(ed.white, ed.black)};
            format!("{}>{} ({:?})", a, b, ed.kind)
        }).collect();
        println!("tile {i}: {}", vs.join("  "));
    }
    let p = enumerate_poset(g, &d, &model.singular).unwrap();
    let bad: BTreeSet<Vec<u32>> = p.elements.iter()
        .filter(|el| {
            let c = truth.coefficient(&el.flips);
            let want = 1i64 << el.cycles;
            c != want
        })
        .map(|el| el.flips.clone()).collect();
    println!("P̄ size {}; bad {:?}", p.elements.len(), bad);
    // any truth term missing from P̄ entirely?
    for (expo, c) in truth.terms() {
        if !p.elements.iter().any(|el| &el.flips == expo) {
            println!("TRUTH TERM NOT IN POSET: {expo:?}*{c}");
        }
    }
    let nv = g.vertex_count();
    let m0 = minimal_matching(g, &d, &model.singular).unwrap();
    for el in &p.elements {
        if bad.contains(&el.flips) {
            println!("bad {:?}: mult {:?} cycles {}", el.flips, el.mult, el.cycles);
        }
    }
    for mode in 0..5 {
        println!("-- mode {} (0=D, 1=D+M, 2=D xor M, 3=mult==1, 4=mult==1 or M)", mode);
        for u in 0..nv { for v in u+1..nv {
            let mut hit: Vec<Vec<u32>> = Vec::new();
            let mut clean = true;
            for el in &p.elements {
                let mut uf: Vec<usize> = (0..nv).collect();
                for (e2, &mm) in el.mult.iter().enumerate() {
                    let on = match mode {
                        0 => mm > 0,
                        1 => mm > 0 || m0[e2] > 0,
                        2 => (mm as i32 - m0[e2] as i32) != 0,
                        3 => mm == 1,
                        _ => mm == 1 || m0[e2] > 0,
                    };
                    if on {
                        let (a,b) = (g.edges[e2].black, g.edges[e2].white);
                        let (ra, rb) = (root(&mut uf, a), root(&mut uf, b));
                        if ra != rb { uf[ra.max(rb)] = ra.min(rb); }
                    }
                }
                if root(&mut uf, u) == root(&mut uf, v) {
                    if bad.contains(&el.flips) { hit.push(el.flips.clone()); }
                    else { clean = false; }
                }
            }
            if clean && !hit.is_empty() {
                println!("pair ({u},{v}): covers {hit:?}");
            }
        }}
    }
}
