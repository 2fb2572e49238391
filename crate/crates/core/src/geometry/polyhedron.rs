//! Spatial convex cells as indexed face loops.

use std::collections::HashMap;

use super::facet::cut;
use super::{Halfspace, Vector};

#[derive(Clone, Debug, PartialEq)]
pub(crate) struct Face {
    /// Vertex indices, counter-clockwise seen from outside.
    pub loop_: Vec<usize>,
    /// Outward unit normal.
    pub normal: Vector,
}

#[derive(Clone, Debug, PartialEq)]
pub(crate) struct Polyhedron {
    pub vertices: Vec<Vector>,
    pub faces: Vec<Face>,
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Side {
    In,
    On,
    Out,
}

impl Polyhedron {
    pub fn cuboid(lo: Vector, hi: Vector) -> Self {
        let v = |x: usize, y: usize, z: usize| {
            Vector::new3(
                if x == 0 { lo[0] } else { hi[0] },
                if y == 0 { lo[1] } else { hi[1] },
                if z == 0 { lo[2] } else { hi[2] },
            )
        };
        // index = x + 2y + 4z
        let vertices = (0..8).map(|i| v(i & 1, (i >> 1) & 1, (i >> 2) & 1)).collect();
        let face = |loop_: [usize; 4], normal: Vector| Face {
            loop_: loop_.to_vec(),
            normal,
        };
        let faces = vec![
            face([0, 4, 6, 2], Vector::new3(-1.0, 0.0, 0.0)),
            face([1, 3, 7, 5], Vector::new3(1.0, 0.0, 0.0)),
            face([0, 1, 5, 4], Vector::new3(0.0, -1.0, 0.0)),
            face([2, 6, 7, 3], Vector::new3(0.0, 1.0, 0.0)),
            face([0, 2, 3, 1], Vector::new3(0.0, 0.0, -1.0)),
            face([4, 5, 7, 6], Vector::new3(0.0, 0.0, 1.0)),
        ];
        Polyhedron { vertices, faces }
    }

    pub fn volume(&self) -> f64 {
        let c = self.vertex_mean();
        let mut six_v = 0.0;
        for f in &self.faces {
            let p0 = self.vertices[f.loop_[0]] - c;
            for w in f.loop_[1..].windows(2) {
                let a = self.vertices[w[0]] - c;
                let b = self.vertices[w[1]] - c;
                six_v += p0.dot(&a.cross(&b));
            }
        }
        six_v / 6.0
    }

    pub fn face_area(&self, f: &Face) -> f64 {
        let p0 = self.vertices[f.loop_[0]];
        let mut acc = Vector::ZERO;
        for w in f.loop_[1..].windows(2) {
            acc += (self.vertices[w[0]] - p0).cross(&(self.vertices[w[1]] - p0));
        }
        0.5 * acc.norm()
    }

    pub fn surface_area(&self) -> f64 {
        self.faces.iter().map(|f| self.face_area(f)).sum()
    }

    pub fn vertex_mean(&self) -> Vector {
        let s = self.vertices.iter().fold(Vector::ZERO, |a, v| a + *v);
        s / self.vertices.len() as f64
    }

    /// Undirected edges `(a, b)` with `a < b`, each paired with the two
    /// adjacent face indices.
    pub fn edges(&self) -> Vec<((usize, usize), [usize; 2])> {
        let mut map: HashMap<(usize, usize), [usize; 2]> = HashMap::new();
        for (fi, f) in self.faces.iter().enumerate() {
            let n = f.loop_.len();
            for i in 0..n {
                let (a, b) = (f.loop_[i], f.loop_[(i + 1) % n]);
                let key = (a.min(b), a.max(b));
                map.entry(key)
                    .and_modify(|e| e[1] = fi)
                    .or_insert([fi, usize::MAX]);
            }
        }
        let mut edges: Vec<_> = map.into_iter().collect();
        edges.sort_unstable_by_key(|(k, _)| *k);
        edges
    }

    /// Mean width from the edge formula `(1/4pi) sum L_e (pi - alpha_e)`,
    /// `pi - alpha_e` being the angle between the adjacent outward normals.
    pub fn mean_width(&self) -> f64 {
        let mut acc = 0.0;
        for ((a, b), [f1, f2]) in self.edges() {
            if f2 == usize::MAX {
                continue;
            }
            let len = self.vertices[a].distance(&self.vertices[b]);
            let c = self.faces[f1]
                .normal
                .dot(&self.faces[f2].normal)
                .clamp(-1.0, 1.0);
            acc += len * c.acos();
        }
        acc / (4.0 * std::f64::consts::PI)
    }

    pub fn translate(&self, a: Vector) -> Polyhedron {
        Polyhedron {
            vertices: self.vertices.iter().map(|v| *v + a).collect(),
            faces: self.faces.clone(),
        }
    }

    /// Intersection with the halfspace `h`. Returns the clipped cell (None
    /// if empty or flat) and the ordered cap polygon lying on `h`'s plane
    /// (empty when the plane only touches the cell).
    pub fn clip(&self, h: &Halfspace, eps: f64) -> (Option<Polyhedron>, Vec<Vector>) {
        let d: Vec<f64> = self.vertices.iter().map(|v| h.signed_distance(v)).collect();
        let side: Vec<Side> = d
            .iter()
            .map(|&x| {
                if x < -eps {
                    Side::In
                } else if x > eps {
                    Side::Out
                } else {
                    Side::On
                }
            })
            .collect();
        if !side.contains(&Side::In) {
            return (None, Vec::new());
        }
        if !side.contains(&Side::Out) {
            let cap: Vec<Vector> = self
                .vertices
                .iter()
                .zip(&side)
                .filter(|(_, s)| **s == Side::On)
                .map(|(v, _)| *v)
                .collect();
            let cap = if cap.len() >= 3 { order_loop(cap, h.normal) } else { Vec::new() };
            return (Some(self.clone()), cap);
        }

        let mut vertices = Vec::with_capacity(self.vertices.len() + 4);
        let mut remap = vec![usize::MAX; self.vertices.len()];
        let mut cap_ids = Vec::new();
        for (i, v) in self.vertices.iter().enumerate() {
            if side[i] != Side::Out {
                remap[i] = vertices.len();
                if side[i] == Side::On {
                    cap_ids.push(vertices.len());
                }
                vertices.push(*v);
            }
        }
        let mut cut_ids: HashMap<(usize, usize), usize> = HashMap::new();
        let mut faces = Vec::with_capacity(self.faces.len() + 1);
        for f in &self.faces {
            let n = f.loop_.len();
            let mut out: Vec<usize> = Vec::with_capacity(n + 1);
            for k in 0..n {
                let (p, q) = (f.loop_[k], f.loop_[(k + 1) % n]);
                if side[p] != Side::Out {
                    out.push(remap[p]);
                }
                let crosses = matches!(
                    (side[p], side[q]),
                    (Side::In, Side::Out) | (Side::Out, Side::In)
                );
                if crosses {
                    let key = (p.min(q), p.max(q));
                    let id = *cut_ids.entry(key).or_insert_with(|| {
                        vertices.push(cut(self.vertices[p], self.vertices[q], d[p], d[q]));
                        cap_ids.push(vertices.len() - 1);
                        vertices.len() - 1
                    });
                    out.push(id);
                }
            }
            out.dedup();
            if out.len() > 1 && out.first() == out.last() {
                out.pop();
            }
            if out.len() >= 3 {
                faces.push(Face {
                    loop_: out,
                    normal: f.normal,
                });
            }
        }

        let mut cap = Vec::new();
        if cap_ids.len() >= 3 {
            let ordered = order_ids(&vertices, cap_ids, h.normal);
            cap = ordered.iter().map(|&i| vertices[i]).collect();
            faces.push(Face {
                loop_: ordered,
                normal: h.normal,
            });
        }
        if faces.len() < 4 {
            return (None, cap);
        }
        let mut poly = Polyhedron { vertices, faces };
        poly.compact();
        (Some(poly), cap)
    }

    fn compact(&mut self) {
        let mut used = vec![false; self.vertices.len()];
        for f in &self.faces {
            for &i in &f.loop_ {
                used[i] = true;
            }
        }
        if used.iter().all(|u| *u) {
            return;
        }
        let mut remap = vec![usize::MAX; self.vertices.len()];
        let mut vs = Vec::with_capacity(self.vertices.len());
        for (i, v) in self.vertices.iter().enumerate() {
            if used[i] {
                remap[i] = vs.len();
                vs.push(*v);
            }
        }
        for f in &mut self.faces {
            for i in &mut f.loop_ {
                *i = remap[*i];
            }
        }
        self.vertices = vs;
    }
}

/// Orders coplanar points counter-clockwise around `normal`.
fn order_ids(vertices: &[Vector], mut ids: Vec<usize>, normal: Vector) -> Vec<usize> {
    let (e1, e2) = plane_basis(normal);
    let c = ids.iter().fold(Vector::ZERO, |a, &i| a + vertices[i]) / ids.len() as f64;
    let angle = |i: usize| {
        let p = vertices[i] - c;
        p.dot(&e2).atan2(p.dot(&e1))
    };
    ids.sort_by(|&a, &b| angle(a).total_cmp(&angle(b)));
    ids.dedup();
    ids
}

fn order_loop(points: Vec<Vector>, normal: Vector) -> Vec<Vector> {
    let ids = order_ids(&points, (0..points.len()).collect(), normal);
    ids.into_iter().map(|i| points[i]).collect()
}

/// Orthonormal `(e1, e2)` with `e1 x e2 = normal`.
pub(crate) fn plane_basis(normal: Vector) -> (Vector, Vector) {
    let helper = if normal[0].abs() < 0.9 {
        Vector::new3(1.0, 0.0, 0.0)
    } else {
        Vector::new3(0.0, 1.0, 0.0)
    };
    let e1 = helper.cross(&normal).normalized().expect("unit normal");
    let e2 = normal.cross(&e1);
    (e1, e2)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unit_cube_measures() {
        let c = Polyhedron::cuboid(Vector::ZERO, Vector::new3(1.0, 1.0, 1.0));
        assert!((c.volume() - 1.0).abs() < 1e-15);
        assert!((c.surface_area() - 6.0).abs() < 1e-15);
        assert_eq!(c.edges().len(), 12);
        assert!((c.mean_width() - 1.5).abs() < 1e-12);
    }

    #[test]
    fn corner_cut_is_tetrahedron() {
        let c = Polyhedron::cuboid(Vector::ZERO, Vector::new3(1.0, 1.0, 1.0));
        let n = Vector::new3(1.0, 1.0, 1.0).normalized().unwrap();
        let h = Halfspace::new(n, 0.5 / 3f64.sqrt());
        let (p, cap) = c.clip(&h, 1e-12);
        let p = p.unwrap();
        assert_eq!(p.vertices.len(), 4);
        assert_eq!(cap.len(), 3);
        assert!((p.volume() - 0.125 / 6.0).abs() < 1e-15);
    }
}
