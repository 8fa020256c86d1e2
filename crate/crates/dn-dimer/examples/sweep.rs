use dn_dimer::dimer::f_polynomial_dimer;
use dn_dimer::jacobian::{grassmannian_point_count, module_from_arc};
use dn_dimer::poly::FPolynomial;
use dn_dimer::quiver::{classify_vatne, is_mutation_dn, Quiver};
use dn_dimer::surface::{all_tagged_arcs, crossing_vector, realize_triangulation};

fn main() {
    let quivers = [
        "n=4\narrows=0->2,1->2,2->3",
        "n=4\narrows=2->0,0->3,2->1,1->3,3->2",
        "n=4\narrows=0->1,1->2,2->3,3->0",
        "n=4\narrows=0->1,1->2,2->0,0->3,3->2",
        "n=5\narrows=0->2,1->0,2->1,3->2,4->2",
        "n=5\narrows=2->0,0->3,2->1,1->3,3->2,3->4",
        "n=5\narrows=0->1,1->2,2->3,3->0,2->4",
        "n=5\narrows=0->1,1->2,2->0,1->3,3->0,2->4,4->1",
        "n=6\narrows=0->2,1->2,2->3,3->4,4->5",
        "n=6\narrows=2->0,0->3,2->1,1->3,3->2,3->4,4->5",
        "n=6\narrows=0->1,1->2,2->3,3->0,2->4,4->5",
        "n=6\narrows=5->3,3->4,4->5,3->2,2->5,2->1,1->0,0->2",
    ];
    let mut bad = 0usize;
    for text in quivers {
        let q: Quiver = text.parse().unwrap();
        let vc = classify_vatne(&q);
        let dn = is_mutation_dn(&q);
        println!("== {} type={} mutation_dn={}", text.replace('\n', " "), vc.type_tag, dn);
        let t = realize_triangulation(&q).unwrap();
        let mut vecs: Vec<Vec<u8>> = Vec::new();
        for g in all_tagged_arcs(t.n) {
            let d = crossing_vector(&t, &g);
            if d.iter().all(|&e| e == 0) || vecs.contains(&d) {
                continue;
            }
            vecs.push(d);
        }
        for d in vecs {
            // Ground truth via Euler characteristics of the module.
            let arc = all_tagged_arcs(t.n)
                .into_iter()
                .find(|g| crossing_vector(&t, g) == d)
                .unwrap();
            let m = module_from_arc(&t, &arc).unwrap();
            let mut truth = FPolynomial::zero(q.n);
            let mut e = vec![0usize; q.n];
            let mut chi_err = None;
            loop {
                let a = grassmannian_point_count(&m, &e, 2);
                match a {
                    Err(er) => { chi_err = Some(format!("{er}")); break; }
                    Ok(a) => {
                        let b = grassmannian_point_count(&m, &e, 3).unwrap() as i64;
                        let c = grassmannian_point_count(&m, &e, 5).unwrap() as i64;
                        let num = 8 * (a as i64) - 6 * b + c;
                        assert_eq!(num % 3, 0);
                        let chi = num / 3;
                        if chi != 0 {
                            let expo: Vec<u32> = e.iter().map(|&x| x as u32).collect();
                            truth.add_term(&expo, chi);
                        }
                    }
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
            if let Some(er) = chi_err {
                println!("  d={d:?}: SKIP chi ({er})");
                continue;
            }
            match f_polynomial_dimer(&q, &d) {
                Ok(f) => {
                    if f != truth {
                        bad += 1;
                        println!("  d={d:?}: MISMATCH");
                        for (expo, c) in truth.terms() {
                            if f.coefficient(expo) != *c {
                                println!("    truth {expo:?}*{c} vs dimer {}", f.coefficient(expo));
                            }
                        }
                        for (expo, c) in f.terms() {
                            if truth.coefficient(expo) != *c {
                                println!("    dimer {expo:?}*{c} vs truth {}", truth.coefficient(expo));
                            }
                        }
                    }
                }
                Err(er) => {
                    bad += 1;
                    println!("  d={d:?}: ERROR {er}");
                }
            }
        }
    }
    println!("total mismatches: {bad}");
}
