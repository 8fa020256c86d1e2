use dn_dimer::dimer::*;
use dn_dimer::jacobian::{grassmannian_point_count, module_from_arc};
use dn_dimer::quiver::Quiver;
use dn_dimer::surface::{all_tagged_arcs, crossing_vector, realize_triangulation};
use std::collections::BTreeSet;

fn line_of(v: &[i64]) -> Option<(i64, i64)> {
    // normalize a nonzero vector in k^2 (rational slope) to a canonical form
    if v.len() != 2 || (v[0] == 0 && v[1] == 0) { return None; }
    let g = num_gcd(v[0].abs(), v[1].abs());
    let (mut a, mut b) = (v[0] / g, v[1] / g);
    if a < 0 || (a == 0 && b < 0) { a = -a; b = -b; }
    Some((a, b))
}
fn num_gcd(a: i64, b: i64) -> i64 { if b == 0 { a.max(1) } else { num_gcd(b, a % b) } }

fn main() {
    let cases = [
        ("n=4\narrows=0->2,1->2,2->3", vec![1u8,1,2,1]),
        ("n=4\narrows=0->1,1->2,2->3,3->0", vec![1,2,1,1]),
        ("n=5\narrows=0->1,1->2,2->3,3->0,2->4", vec![0,1,2,1,1]),
        ("n=5\narrows=0->1,1->2,2->3,3->0,2->4", vec![1,1,2,1,1]),
        ("n=6\narrows=5->3,3->4,4->5,3->2,2->5,2->1,1->0,0->2", vec![1,1,2,1,1,1]),
        ("n=6\narrows=0->1,1->2,2->3,3->0,2->4,4->5", vec![0,1,2,1,1,1]),
        ("n=6\narrows=0->1,1->2,2->3,3->0,2->4,4->5", vec![0,1,2,1,2,1]),
    ];
    for (qtext, d) in cases {
        let q: Quiver = qtext.parse().unwrap();
        let t = realize_triangulation(&q).unwrap();
        let Some(arc) = all_tagged_arcs(t.n).into_iter().find(|g| crossing_vector(&t, g) == d) else {
            println!("== {} d={:?}: no arc", qtext.replace('\n'," "), d); continue;
        };
        let m = module_from_arc(&t, &arc).unwrap();
        let g = build_base_graph(&t).unwrap();
        let singular = m.singular.clone();
        let p = enumerate_poset(&g, &d, &singular).unwrap();
        // truth
        let mut bad: BTreeSet<Vec<u32>> = BTreeSet::new();
        for el in &p.elements {
            let e: Vec<usize> = el.flips.iter().map(|&x| x as usize).collect();
            let a = grassmannian_point_count(&m, &e, 2).unwrap() as i64;
            let b = grassmannian_point_count(&m, &e, 3).unwrap() as i64;
            let c = grassmannian_point_count(&m, &e, 5).unwrap() as i64;
            let chi = (8*a - 6*b + c) / 3;
            if chi != (1i64 << el.cycles) { bad.insert(el.flips.clone()); }
        }
        // lines per doubled tile
        let mut predicted: BTreeSet<Vec<u32>> = BTreeSet::new();
        for i in 0..q.n {
            if d[i] != 2 { continue; }
            // incident arrow edges with lines
            let mut lines: Vec<(usize, (i64,i64))> = Vec::new(); // (edge, line)
            for (&(s, tg), mat) in &m.maps {
                if tg == i && d[s] == 1 {
                    // image line: column 0
                    let col: Vec<i64> = (0..2).map(|r| mat[r][0]).collect();
                    if let Some(l) = line_of(&col) {
                        if let Some(e) = g.arrow_edge(s, i) { lines.push((e, l)); }
                    }
                } else if s == i && d[tg] == 1 {
                    // kernel line of 1x2 matrix [a b]: (b, -a)
                    let (a, b) = (mat[0][0], mat[0][1]);
                    if a != 0 || b != 0 {
                        if let Some(l) = line_of(&[b, -a]) {
                            if let Some(e) = g.arrow_edge(i, tg) { lines.push((e, l)); }
                        }
                    }
                }
            }
            let tile_edges: Vec<usize> = g.tiles[i].iter().map(|&(e,_)| e).collect();
            for el in &p.elements {
                if tile_edges.iter().any(|&e| el.mult[e] == 2) { continue; }
                let mut fire = false;
                for a in 0..lines.len() { for b in a+1..lines.len() {
                    if lines[a].1 != lines[b].1 && el.mult[lines[a].0] == 0 && el.mult[lines[b].0] == 0 {
                        fire = true;
                    }
                }}
                if fire { predicted.insert(el.flips.clone()); }
            }
            println!("  tile {i} lines: {:?}", lines);
        }
        let ok = bad == predicted;
        println!("== {} d={:?}: |P|={} bad={:?} predicted={:?} {}",
            qtext.replace('\n'," "), d, p.elements.len(), bad, predicted, if ok {"MATCH"} else {"DIFFER"});
    }
}
