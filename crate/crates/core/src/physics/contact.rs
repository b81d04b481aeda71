use super::{MassPoint, Vec2};

/// Outward penetration of `p` into a counter-clockwise convex quad:
/// `(edge index, depth, outward normal, position along the edge)`.
fn penetration(p: Vec2, quad: [Vec2; 4]) -> Option<(usize, f64, Vec2, f64)> {
    let (mut lo, mut hi) = ([f64::INFINITY; 2], [f64::NEG_INFINITY; 2]);
    for v in &quad {
        for k in 0..2 {
            lo[k] = lo[k].min(v[k]);
            hi[k] = hi[k].max(v[k]);
        }
    }
    if p[0] <= lo[0] || p[0] >= hi[0] || p[1] <= lo[1] || p[1] >= hi[1] {
        return None;
    }
    let mut best: Option<(usize, f64, Vec2, f64)> = None;
    for i in 0..4 {
        let a = quad[i];
        let b = quad[(i + 1) % 4];
        let e = [b[0] - a[0], b[1] - a[1]];
        let len = (e[0] * e[0] + e[1] * e[1]).sqrt();
        if len < 1e-12 {
            continue;
        }
        let n = [e[1] / len, -e[0] / len];
        let outward = (p[0] - a[0]) * n[0] + (p[1] - a[1]) * n[1];
        if outward >= 0.0 {
            return None;
        }
        let depth = -outward;
        if best.is_none_or(|(_, d, _, _)| depth < d) {
            let t = (((p[0] - a[0]) * e[0] + (p[1] - a[1]) * e[1]) / (len * len)).clamp(0.0, 1.0);
            best = Some((i, depth, n, t));
        }
    }
    best
}

/// Penalty contact between a point and an edge `a → b`. Equal and opposite
/// forces keep total momentum unchanged.
#[allow(clippy::too_many_arguments)]
fn push_apart(points: &mut [MassPoint], p: usize, a: usize, b: usize, depth: f64, n: Vec2, t: f64, k: f64, c: f64, mu: f64) {
    let va = points[a].velocity;
    let vb = points[b].velocity;
    let ve = [(1.0 - t) * va[0] + t * vb[0], (1.0 - t) * va[1] + t * vb[1]];
    let vp = points[p].velocity;
    let rel = [vp[0] - ve[0], vp[1] - ve[1]];
    let vn = rel[0] * n[0] + rel[1] * n[1];
    let fn_ = (k * depth - c * vn).max(0.0);
    let vt = [rel[0] - vn * n[0], rel[1] - vn * n[1]];
    let vt_len = (vt[0] * vt[0] + vt[1] * vt[1]).sqrt();
    let ft = if vt_len > 1e-12 { (mu * fn_).min(c * vt_len) / vt_len } else { 0.0 };
    let f = [fn_ * n[0] - ft * vt[0], fn_ * n[1] - ft * vt[1]];
    points[p].force[0] += f[0];
    points[p].force[1] += f[1];
    points[a].force[0] -= (1.0 - t) * f[0];
    points[a].force[1] -= (1.0 - t) * f[1];
    points[b].force[0] -= t * f[0];
    points[b].force[1] -= t * f[1];
}

/// Two-way contact between the robot and the free box: robot points inside
/// the box and box corners inside any robot voxel are pushed out.
pub(super) fn box_robot_forces(
    points: &mut [MassPoint],
    robot_points: usize,
    voxels: &[Option<[usize; 4]>],
    box_corners: &[usize; 4],
    stiffness: f64,
    damping: f64,
    friction: f64,
) {
    let quad_of = |points: &[MassPoint], idx: &[usize; 4]| idx.map(|i| points[i].position);

    let box_quad = quad_of(points, box_corners);
    for p in 0..robot_points {
        if let Some((edge, depth, n, t)) = penetration(points[p].position, box_quad) {
            let (a, b) = (box_corners[edge], box_corners[(edge + 1) % 4]);
            push_apart(points, p, a, b, depth, n, t, stiffness, damping, friction);
        }
    }
    for corners in voxels.iter().flatten() {
        let quad = quad_of(points, corners);
        for &p in box_corners {
            if let Some((edge, depth, n, t)) = penetration(points[p].position, quad) {
                let (a, b) = (corners[edge], corners[(edge + 1) % 4]);
                push_apart(points, p, a, b, depth, n, t, stiffness, damping, friction);
            }
        }
    }
}
