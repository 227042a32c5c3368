use std::collections::HashMap;

use super::{local_edge_vertices, Mesh};

pub(super) fn refine_uniform(mesh: &Mesh) -> Mesh {
    let nv = mesh.n_vertices();
    let mut vertices = mesh.vertices.clone();
    vertices.extend((0..mesh.n_edges()).map(|e| mesh.edge_midpoint(e)));

    let nt = mesh.n_triangles();
    let mut triangles = Vec::with_capacity(4 * nt);
    let mut refinement_edge = Vec::with_capacity(4 * nt);
    let mut generation = Vec::with_capacity(4 * nt);
    for t in 0..nt {
        let [v0, v1, v2] = mesh.triangles[t];
        let [e0, e1, e2] = mesh.triangle_edges[t];
        let (m0, m1, m2) = (nv + e0, nv + e1, nv + e2);
        // Each child is similar to its parent with matching local numbering,
        // so the parent's refinement edge index carries over.
        for child in [[v0, m2, m1], [m2, v1, m0], [m1, m0, v2], [m0, m1, m2]] {
            triangles.push(child);
            refinement_edge.push(mesh.refinement_edge[t]);
            generation.push(mesh.generation[t] + 2);
        }
    }
    Mesh::from_parts(vertices, triangles, refinement_edge, generation).expect("red refinement preserves conformity")
}

pub(super) fn refine_nvb(mesh: &Mesh, marked: &[usize]) -> Mesh {
    let ref_edge = |t: usize| mesh.triangle_edges[t][mesh.refinement_edge[t] as usize];

    let mut edge_marked = vec![false; mesh.n_edges()];
    let mut work = Vec::new();
    for &t in marked {
        let e = ref_edge(t);
        if !edge_marked[e] {
            edge_marked[e] = true;
            work.push(e);
        }
    }
    // Closure: a triangle with any marked side must also split its refinement edge.
    while let Some(e) = work.pop() {
        let (plus, minus) = mesh.edge_triangles[e];
        for t in std::iter::once(plus).chain(minus) {
            let r = ref_edge(t);
            if !edge_marked[r] {
                edge_marked[r] = true;
                work.push(r);
            }
        }
    }

    if !edge_marked.iter().any(|&m| m) {
        return mesh.clone();
    }

    let mut vertices = mesh.vertices.clone();
    let mut midpoint: HashMap<[usize; 2], usize> = HashMap::new();
    for (e, _) in edge_marked.iter().enumerate().filter(|(_, &m)| m) {
        midpoint.insert(mesh.edges[e], vertices.len());
        vertices.push(mesh.edge_midpoint(e));
    }

    let mut out = Output::default();
    for t in 0..mesh.n_triangles() {
        bisect(
            mesh.triangles[t],
            mesh.refinement_edge[t] as usize,
            mesh.generation[t],
            &midpoint,
            &mut out,
        );
    }
    Mesh::from_parts(vertices, out.triangles, out.refinement_edge, out.generation)
        .expect("closure keeps the bisected mesh conforming")
}

#[derive(Default)]
struct Output {
    triangles: Vec<[usize; 3]>,
    refinement_edge: Vec<u8>,
    generation: Vec<u32>,
}

fn bisect(tri: [usize; 3], r: usize, generation: u32, midpoint: &HashMap<[usize; 2], usize>, out: &mut Output) {
    let (ib, ic) = local_edge_vertices(r);
    let (a, b, c) = (tri[r], tri[ib], tri[ic]);
    let key = if b < c { [b, c] } else { [c, b] };
    match midpoint.get(&key) {
        None => {
            out.triangles.push(tri);
            out.refinement_edge.push(r as u8);
            out.generation.push(generation);
        }
        Some(&m) => {
            // The new vertex m is the newest vertex of both children.
            bisect([a, b, m], 2, generation + 1, midpoint, out);
            bisect([a, m, c], 1, generation + 1, midpoint, out);
        }
    }
}
