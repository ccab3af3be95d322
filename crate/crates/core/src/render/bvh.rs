//! Binned-SAH bounding volume hierarchy over triangles.

use crate::math::Vec3;

#[derive(Debug, Clone, Copy)]
pub struct Ray {
    pub origin: Vec3,
    pub dir: Vec3,
}

impl Ray {
    pub fn at(&self, t: f64) -> Vec3 {
        self.origin + self.dir * t
    }
}

#[derive(Debug, Clone, Copy)]
pub struct Hit {
    pub t: f64,
    pub tri: u32,
    pub u: f64,
    pub v: f64,
}

#[derive(Debug, Clone, Copy)]
struct Tri {
    v0: Vec3,
    e1: Vec3,
    e2: Vec3,
}

#[derive(Debug, Clone, Copy)]
struct Aabb {
    lo: Vec3,
    hi: Vec3,
}

impl Aabb {
    const EMPTY: Aabb = Aabb {
        lo: Vec3::new(f64::INFINITY, f64::INFINITY, f64::INFINITY),
        hi: Vec3::new(f64::NEG_INFINITY, f64::NEG_INFINITY, f64::NEG_INFINITY),
    };
    fn grow(&mut self, p: &Vec3) {
        self.lo = self.lo.inf(p);
        self.hi = self.hi.sup(p);
    }
    fn merge(&mut self, o: &Aabb) {
        self.lo = self.lo.inf(&o.lo);
        self.hi = self.hi.sup(&o.hi);
    }
    fn area(&self) -> f64 {
        let d = self.hi - self.lo;
        if d.x < 0.0 {
            0.0
        } else {
            2.0 * (d.x * d.y + d.y * d.z + d.z * d.x)
        }
    }
}

#[derive(Debug, Clone, Copy)]
struct Node {
    bounds: Aabb,
    /// Leaf: first primitive; inner: right child (left is `self + 1`).
    index: u32,
    /// Primitive count, 0 for inner nodes.
    count: u32,
    axis: u8,
}

#[derive(Debug, Clone)]
pub struct Bvh {
    nodes: Vec<Node>,
    tris: Vec<Tri>,
    /// Original triangle index of each stored primitive.
    order: Vec<u32>,
}

const LEAF_SIZE: usize = 4;
const BINS: usize = 16;

impl Bvh {
    pub fn build(triangles: &[[Vec3; 3]]) -> Bvh {
        let n = triangles.len();
        let mut boxes = Vec::with_capacity(n);
        let mut centroids = Vec::with_capacity(n);
        for t in triangles {
            let mut b = Aabb::EMPTY;
            for p in t {
                b.grow(p);
            }
            boxes.push(b);
            centroids.push((t[0] + t[1] + t[2]) / 3.0);
        }
        let mut idx: Vec<u32> = (0..n as u32).collect();
        let mut nodes = Vec::with_capacity(2 * n.max(1));
        if n > 0 {
            build_rec(&mut nodes, &mut idx, 0, n, &boxes, &centroids);
        }
        let tris = idx
            .iter()
            .map(|&i| {
                let [a, b, c] = triangles[i as usize];
                Tri {
                    v0: a,
                    e1: b - a,
                    e2: c - a,
                }
            })
            .collect();
        Bvh {
            nodes,
            tris,
            order: idx,
        }
    }

    pub fn len(&self) -> usize {
        self.tris.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tris.is_empty()
    }

    #[inline]
    fn tri_hit(t: &Tri, ray: &Ray, tmin: f64, tmax: f64) -> Option<(f64, f64, f64)> {
        let p = ray.dir.cross(&t.e2);
        let det = t.e1.dot(&p);
        if det.abs() < 1e-300 {
            return None;
        }
        let inv = 1.0 / det;
        let s = ray.origin - t.v0;
        let u = s.dot(&p) * inv;
        if !(0.0..=1.0).contains(&u) {
            return None;
        }
        let q = s.cross(&t.e1);
        let v = ray.dir.dot(&q) * inv;
        if v < 0.0 || u + v > 1.0 {
            return None;
        }
        let d = t.e2.dot(&q) * inv;
        if d > tmin && d < tmax {
            Some((d, u, v))
        } else {
            None
        }
    }

    #[inline]
    fn slab(b: &Aabb, o: &Vec3, inv: &Vec3, tmax: f64) -> Option<f64> {
        let mut t0: f64 = 0.0;
        let mut t1 = tmax;
        for k in 0..3 {
            let a = (b.lo[k] - o[k]) * inv[k];
            let c = (b.hi[k] - o[k]) * inv[k];
            let (near, far) = if a < c { (a, c) } else { (c, a) };
            // NaN from 0 * inf leaves the bound untouched.
            if near > t0 {
                t0 = near;
            }
            if far < t1 {
                t1 = far;
            }
            if t0 > t1 {
                return None;
            }
        }
        Some(t0)
    }

    /// Closest hit with `t` in `(tmin, tmax)`.
    pub fn intersect(&self, ray: &Ray, tmin: f64, tmax: f64) -> Option<Hit> {
        if self.nodes.is_empty() {
            return None;
        }
        let inv = ray.dir.map(|d| 1.0 / d);
        let neg = [ray.dir.x < 0.0, ray.dir.y < 0.0, ray.dir.z < 0.0];
        let mut best: Option<Hit> = None;
        let mut tbest = tmax;
        let mut stack = [0u32; 64];
        let mut sp = 0usize;
        let mut cur = 0u32;
        loop {
            let node = &self.nodes[cur as usize];
            if Self::slab(&node.bounds, &ray.origin, &inv, tbest).is_some() {
                if node.count > 0 {
                    for i in node.index..node.index + node.count {
                        if let Some((t, u, v)) =
                            Self::tri_hit(&self.tris[i as usize], ray, tmin, tbest)
                        {
                            tbest = t;
                            best = Some(Hit {
                                t,
                                tri: self.order[i as usize],
                                u,
                                v,
                            });
                        }
                    }
                } else {
                    let (first, second) = if neg[node.axis as usize] {
                        (node.index, cur + 1)
                    } else {
                        (cur + 1, node.index)
                    };
                    stack[sp] = second;
                    sp += 1;
                    cur = first;
                    continue;
                }
            }
            if sp == 0 {
                break;
            }
            sp -= 1;
            cur = stack[sp];
        }
        best
    }

    /// Whether anything lies in `(tmin, tmax)` along the ray.
    pub fn occluded(&self, ray: &Ray, tmin: f64, tmax: f64) -> bool {
        if self.nodes.is_empty() {
            return false;
        }
        let inv = ray.dir.map(|d| 1.0 / d);
        let mut stack = [0u32; 64];
        let mut sp = 0usize;
        let mut cur = 0u32;
        loop {
            let node = &self.nodes[cur as usize];
            if Self::slab(&node.bounds, &ray.origin, &inv, tmax).is_some() {
                if node.count > 0 {
                    for i in node.index..node.index + node.count {
                        if Self::tri_hit(&self.tris[i as usize], ray, tmin, tmax).is_some() {
                            return true;
                        }
                    }
                } else {
                    stack[sp] = node.index;
                    sp += 1;
                    cur += 1;
                    continue;
                }
            }
            if sp == 0 {
                return false;
            }
            sp -= 1;
            cur = stack[sp];
        }
    }
}

fn build_rec(
    nodes: &mut Vec<Node>,
    idx: &mut [u32],
    start: usize,
    end: usize,
    boxes: &[Aabb],
    cent: &[Vec3],
) -> u32 {
    let me = nodes.len() as u32;
    let mut bounds = Aabb::EMPTY;
    let mut cb = Aabb::EMPTY;
    for &i in &idx[start..end] {
        bounds.merge(&boxes[i as usize]);
        cb.grow(&cent[i as usize]);
    }
    nodes.push(Node {
        bounds,
        index: start as u32,
        count: (end - start) as u32,
        axis: 0,
    });
    let n = end - start;
    if n <= LEAF_SIZE {
        return me;
    }
    let ext = cb.hi - cb.lo;
    let axis = ext.imax();
    if ext[axis] <= 0.0 {
        // Coincident centroids: split in the middle.
        return split_at(nodes, idx, start, end, start + n / 2, axis, me, boxes, cent);
    }
    let mut bin_box = [Aabb::EMPTY; BINS];
    let mut bin_n = [0usize; BINS];
    let scale = BINS as f64 / ext[axis];
    let bin_of = |c: &Vec3| (((c[axis] - cb.lo[axis]) * scale) as usize).min(BINS - 1);
    for &i in &idx[start..end] {
        let b = bin_of(&cent[i as usize]);
        bin_n[b] += 1;
        bin_box[b].merge(&boxes[i as usize]);
    }
    let mut best = (f64::INFINITY, 0usize);
    for split in 1..BINS {
        let (mut l, mut r) = (Aabb::EMPTY, Aabb::EMPTY);
        let (mut nl, mut nr) = (0, 0);
        for b in 0..split {
            l.merge(&bin_box[b]);
            nl += bin_n[b];
        }
        for b in split..BINS {
            r.merge(&bin_box[b]);
            nr += bin_n[b];
        }
        if nl == 0 || nr == 0 {
            continue;
        }
        let cost = l.area() * nl as f64 + r.area() * nr as f64;
        if cost < best.0 {
            best = (cost, split);
        }
    }
    let leaf_cost = bounds.area() * n as f64;
    if best.0 >= leaf_cost && n <= 16 {
        return me;
    }
    let mid = if best.0.is_finite() {
        let slice = &mut idx[start..end];
        let mut k = 0;
        for j in 0..slice.len() {
            if bin_of(&cent[slice[j] as usize]) < best.1 {
                slice.swap(j, k);
                k += 1;
            }
        }
        start + k
    } else {
        start + n / 2
    };
    split_at(nodes, idx, start, end, mid, axis, me, boxes, cent)
}

#[allow(clippy::too_many_arguments)]
fn split_at(
    nodes: &mut Vec<Node>,
    idx: &mut [u32],
    start: usize,
    end: usize,
    mid: usize,
    axis: usize,
    me: u32,
    boxes: &[Aabb],
    cent: &[Vec3],
) -> u32 {
    build_rec(nodes, idx, start, mid, boxes, cent);
    let right = build_rec(nodes, idx, mid, end, boxes, cent);
    let node = &mut nodes[me as usize];
    node.index = right;
    node.count = 0;
    node.axis = axis as u8;
    me
}
