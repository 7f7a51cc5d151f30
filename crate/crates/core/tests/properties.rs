mod common;

use std::collections::BTreeSet;
use std::path::Path;

use proptest::prelude::*;
use serde_json::json;

use fractura::anisotropy::{surface_energy, surface_energy_oriented, AnisotropyConfig, AnisotropyField, NormalSign};
use fractura::elastic::Mesh;
use fractura::evolution::{run_evolution, SearchStrategy};
use fractura::geometry::{
    approximate_normal, connected_components, h1_measure, hausdorff_distance, is_subset, CrackSet, Point2, HAUSDORFF_TOL,
};
use fractura::scenario::ScenarioConfig;

use common::*;

fn grid() -> Mesh {
    unit_square(6, &ALL_SIDES).with_all_edges_as_crack_graph(true)
}

fn edge_subset() -> impl Strategy<Value = BTreeSet<usize>> {
    // the 6x6 grid has 6·7·2 axis edges plus 36 diagonals
    prop::collection::btree_set(0usize..120, 1..12)
}

fn weighted() -> AnisotropyField {
    let cfg: AnisotropyConfig = serde_json::from_value(json!({
        "kind": "weighted_norm",
        "parameters": {"metric": {"type": "expression", "m11": "1 + x", "m12": "0.2*y", "m22": "2 - y"}},
        "c1": 0.5,
        "c2": 2.0
    }))
    .unwrap();
    AnisotropyField::new(cfg, [0.0, 0.0, 1.0, 1.0], 11).unwrap()
}

fn fields() -> Vec<AnisotropyField> {
    vec![
        AnisotropyField::euclidean(),
        AnisotropyField::crystalline([1.0, 0.5], [-0.25, 1.0]).unwrap(),
        weighted(),
    ]
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 48, ..ProptestConfig::default() })]

    #[test]
    fn hausdorff_is_a_metric(a in edge_subset(), b in edge_subset(), c in edge_subset()) {
        let m = grid();
        let dom = m.domain();
        let set = |s: &BTreeSet<usize>| m.crack_from_edges(&s.iter().copied().collect::<Vec<_>>()).unwrap();
        let (ka, kb, kc) = (set(&a), set(&b), set(&c));
        let ab = hausdorff_distance(&ka, &kb, &dom);
        prop_assert_eq!(ab, hausdorff_distance(&kb, &ka, &dom));
        let ac = hausdorff_distance(&ka, &kc, &dom);
        let cb = hausdorff_distance(&kc, &kb, &dom);
        prop_assert!(ab <= ac + cb + 2.0 * HAUSDORFF_TOL);
        prop_assert_eq!(hausdorff_distance(&ka, &ka, &dom), 0.0);
        if a != b {
            prop_assert!(ab > HAUSDORFF_TOL);
        }
    }

    #[test]
    fn length_is_additive_and_components_never_grow_by_joining(a in edge_subset(), b in edge_subset()) {
        let m = grid();
        let b: BTreeSet<usize> = b.difference(&a).copied().collect();
        prop_assume!(!b.is_empty());
        let ka = m.crack_from_edges(&a.iter().copied().collect::<Vec<_>>()).unwrap();
        let kb = m.crack_from_edges(&b.iter().copied().collect::<Vec<_>>()).unwrap();
        let u = ka.union(&kb).unwrap();
        let sum = h1_measure(&ka) + h1_measure(&kb);
        prop_assert!((h1_measure(&u) - sum).abs() <= 1e-14 * sum);
        prop_assert!(is_subset(&ka, &u).unwrap());

        // adding an edge whose endpoints both already lie on the crack
        let verts: Vec<Point2> = ka.vertices().to_vec();
        for (id, e) in m.crack_graph_edges().iter().enumerate() {
            if a.contains(&id) {
                continue;
            }
            let (p, q) = (m.nodes()[e[0]], m.nodes()[e[1]]);
            if verts.contains(&p) && verts.contains(&q) {
                let mut bigger: Vec<usize> = a.iter().copied().collect();
                bigger.push(id);
                let k2 = m.crack_from_edges(&bigger).unwrap();
                prop_assert!(connected_components(&k2) <= connected_components(&ka));
            }
        }
    }

    #[test]
    fn normals_are_unit_and_orthogonal(x1 in -5.0..5.0f64, y1 in -5.0..5.0f64, dx in -3.0..3.0f64, dy in -3.0..3.0f64, t in 0.01..0.99f64) {
        prop_assume!(dx.hypot(dy) > 1e-3);
        let k = CrackSet::from_coords(&[[x1, y1, x1 + dx, y1 + dy]]).unwrap();
        let n = approximate_normal(&k, 0, t).unwrap().as_array();
        prop_assert!((n[0].hypot(n[1]) - 1.0).abs() <= 1e-12);
        let len = dx.hypot(dy);
        prop_assert!(((n[0] * dx + n[1] * dy) / len).abs() <= 1e-12);
        prop_assert!(n[0] > 0.0 || (n[0] == 0.0 && n[1] > 0.0));
    }

    #[test]
    fn surface_energy_invariants(a in edge_subset(), b in edge_subset(), factor in 0.1..3.0f64) {
        let m = grid();
        let ka = m.crack_from_edges(&a.iter().copied().collect::<Vec<_>>()).unwrap();
        let ab: Vec<usize> = a.union(&b).copied().collect();
        let kab = m.crack_from_edges(&ab).unwrap();
        for (i, phi) in fields().iter().enumerate() {
            let f = surface_energy(&ka, phi);
            // evenness
            prop_assert_eq!(f, surface_energy_oriented(&ka, phi, NormalSign::Flipped));
            // collinear refinement
            prop_assert!((surface_energy(&ka.refined(2).unwrap(), phi) - f).abs() <= 1e-12 * f.max(1.0));
            // monotone under inclusion
            prop_assert!(f <= surface_energy(&kab, phi));
            // growth bounds
            let len = h1_measure(&ka);
            prop_assert!(phi.c1() * len <= f + 1e-12 * f && f <= phi.c2() * len + 1e-12 * f);
            // homogeneity for position-independent densities
            if i < 2 {
                let d = ka.dilated(Point2::new(0.5, 0.5), factor).unwrap();
                prop_assert!((surface_energy(&d, phi) - factor * f).abs() <= 1e-12 * f.max(1.0));
            }
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 8, ..ProptestConfig::default() })]

    #[test]
    fn traces_are_monotone_and_feasible(toughness in 0.2..3.0f64, amplitude in 0.5..3.0f64, m in 1usize..3, greedy in any::<bool>()) {
        let cfg: ScenarioConfig = serde_json::from_value(json!({
            "name": "random",
            "mesh": {"rectangle": {"x0": 0, "y0": 0, "x1": 2, "y1": 1, "nx": 8, "ny": 4, "dirichlet": ["bottom", "top"]}},
            "crack_lines": [[0, 0.5, 2, 0.5], [1, 0, 1, 1]],
            "coefficient": {"scalar": {"field": {"type": "constant", "a": [1, 0, 1]}, "alpha1": 1, "alpha2": 1}},
            "phi": {"kind": "weighted_norm", "parameters": {"metric": {"type": "constant", "m": [toughness * toughness, 0, toughness * toughness]}}, "c1": toughness, "c2": toughness},
            "load": [
                {"t": 0, "g": {"type": "scalar", "u": "0"}},
                {"t": 1, "g": {"type": "scalar", "u": format!("{amplitude}*(2*y - 1) + x/4")}}
            ],
            "m": m
        })).unwrap();
        let s = cfg.build(Path::new("."), 1, None).unwrap();
        let strategy = if greedy { SearchStrategy::Greedy } else { SearchStrategy::Exhaustive };
        let tr = run_evolution(&s, 0.25, strategy).unwrap();
        for i in 0..tr.steps.len() {
            let k = tr.edge_set(i);
            prop_assert!(connected_components(&s.graph.crack_set(&k)) <= m);
            if i + 1 < tr.steps.len() {
                prop_assert!(k.is_subset(&tr.edge_set(i + 1)));
            }
            let st = &tr.steps[i];
            prop_assert_eq!(st.total, st.bulk + st.surface);
        }
    }
}
