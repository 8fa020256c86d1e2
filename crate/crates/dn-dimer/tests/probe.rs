use dn_dimer::quiver::Quiver;
use dn_dimer::surface::realize_triangulation;

#[test]
fn probe_triangulations() {
    for spec in [
        "n=4\narrows=0->2,1->2,2->3",
        "n=4\narrows=2->0,0->3,2->1,1->3,3->2",
        "n=4\narrows=0->1,1->2,2->3,3->0",
        "n=5\narrows=0->2,1->0,2->1,3->2,4->2",
        "n=5\narrows=0->1,1->2,2->0,1->3,3->0,2->4,4->1",
        "n=6\narrows=5->3,3->4,4->5,3->2,2->5,2->1,1->0,0->2",
    ] {
        let q: Quiver = spec.parse().unwrap();
        let t = realize_triangulation(&q).unwrap();
        eprintln!("== {}", spec.replace('\n', "  "));
        for (i, a) in t.arcs().iter().enumerate() {
            eprintln!("  arc {i}: {a:?}");
        }
        for tri in t.triangles() {
            eprintln!("  tri {:?} self_folded={}", tri.sides, tri.is_self_folded());
        }
    }
}
