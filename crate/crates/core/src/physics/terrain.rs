use serde::{Deserialize, Serialize};

pub type Vec2 = [f64; 2];

/// Static environment geometry.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum TerrainSpec {
    /// Free space, no contacts at all.
    Open,
    /// Horizontal ground at `height`.
    Flat { height: f64 },
    /// Piecewise-linear ground through `(x0 + i·dx, heights[i])`, extended
    /// flat beyond both ends.
    HeightField { x0: f64, dx: f64, heights: Vec<f64> },
    /// Flat floor between two stepped vertical walls. Step `k` spans
    /// `floor + k·step_height ..= floor + (k+1)·step_height`; on odd steps
    /// both walls jut `step_depth` into the channel.
    Channel { floor: f64, left_x: f64, right_x: f64, step_height: f64, step_depth: f64 },
}

/// One contact constraint: points must satisfy `(p - anchor)·normal ≥ 0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Contact {
    pub normal: Vec2,
    pub depth: f64,
}

impl TerrainSpec {
    /// Ground surface height below `x`, if the terrain has a floor.
    pub fn ground_height(&self, x: f64) -> Option<f64> {
        match self {
            TerrainSpec::Open => None,
            TerrainSpec::Flat { height } => Some(*height),
            TerrainSpec::Channel { floor, .. } => Some(*floor),
            TerrainSpec::HeightField { x0, dx, heights } => {
                let (i, t) = segment_at(*x0, *dx, heights.len(), x);
                Some(heights[i] + t * (heights[(i + 1).min(heights.len() - 1)] - heights[i]))
            }
        }
    }

    /// Highest ground point over `[x_min, x_max]`.
    pub fn max_ground_height(&self, x_min: f64, x_max: f64) -> Option<f64> {
        let mut best = self.ground_height(x_min)?.max(self.ground_height(x_max)?);
        if let TerrainSpec::HeightField { x0, dx, heights } = self {
            for (i, h) in heights.iter().enumerate() {
                let x = x0 + i as f64 * dx;
                if x > x_min && x < x_max {
                    best = best.max(*h);
                }
            }
        }
        Some(best)
    }

    /// Inner faces of the channel walls at height `y`, as `(left, right)`.
    pub fn walls_at(&self, y: f64) -> Option<(f64, f64)> {
        match self {
            TerrainSpec::Channel { floor, left_x, right_x, step_height, step_depth } => {
                let k = ((y - floor) / step_height).floor();
                let jut = if k >= 0.0 && (k as i64) % 2 == 1 { *step_depth } else { 0.0 };
                Some((left_x + jut, right_x - jut))
            }
            _ => None,
        }
    }

    /// Contacts violated by a point at `p`, in resolution order.
    pub(crate) fn contacts(&self, p: Vec2, out: &mut Vec<Contact>) {
        out.clear();
        match self {
            TerrainSpec::Open => {}
            TerrainSpec::Flat { height } => {
                if p[1] < *height {
                    out.push(Contact { normal: [0.0, 1.0], depth: height - p[1] });
                }
            }
            TerrainSpec::HeightField { x0, dx, heights } => {
                let (i, _) = segment_at(*x0, *dx, heights.len(), p[0]);
                let j = (i + 1).min(heights.len() - 1);
                let ax = x0 + i as f64 * dx;
                let (h0, h1) = (heights[i], heights[j]);
                let beyond = p[0] < *x0 || i == j;
                let (tx, ty) = if beyond { (1.0, 0.0) } else { (*dx, h1 - h0) };
                let len = (tx * tx + ty * ty).sqrt();
                let normal = [-ty / len, tx / len];
                let anchor = if beyond { [p[0], h0] } else { [ax, h0] };
                let signed = (p[0] - anchor[0]) * normal[0] + (p[1] - anchor[1]) * normal[1];
                if signed < 0.0 {
                    out.push(Contact { normal, depth: -signed });
                }
            }
            TerrainSpec::Channel { floor, .. } => {
                if p[1] < *floor {
                    out.push(Contact { normal: [0.0, 1.0], depth: floor - p[1] });
                }
                let (left, right) = self.walls_at(p[1].max(*floor)).expect("channel has walls");
                if p[0] < left {
                    out.push(Contact { normal: [1.0, 0.0], depth: left - p[0] });
                } else if p[0] > right {
                    out.push(Contact { normal: [-1.0, 0.0], depth: p[0] - right });
                }
            }
        }
    }
}

/// Segment index and interpolation parameter for `x` on a height field.
fn segment_at(x0: f64, dx: f64, count: usize, x: f64) -> (usize, f64) {
    if count < 2 || x <= x0 {
        return (0, 0.0);
    }
    let u = (x - x0) / dx;
    let i = u.floor() as usize;
    if i >= count - 1 {
        (count - 1, 0.0)
    } else {
        (i, u - i as f64)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn height_field_interpolates_and_extends() {
        let t = TerrainSpec::HeightField { x0: 0.0, dx: 1.0, heights: vec![0.0, 1.0, 0.0] };
        assert_eq!(t.ground_height(-3.0), Some(0.0));
        assert_eq!(t.ground_height(0.5), Some(0.5));
        assert_eq!(t.ground_height(1.5), Some(0.5));
        assert_eq!(t.ground_height(9.0), Some(0.0));
        assert_eq!(t.max_ground_height(0.2, 1.8), Some(1.0));
    }

    #[test]
    fn slope_contact_normal() {
        let t = TerrainSpec::HeightField { x0: 0.0, dx: 1.0, heights: vec![0.0, 1.0] };
        let mut c = Vec::new();
        t.contacts([0.5, 0.0], &mut c);
        assert_eq!(c.len(), 1);
        let n = c[0].normal;
        let s = std::f64::consts::FRAC_1_SQRT_2;
        assert!((n[0] + s).abs() < 1e-12 && (n[1] - s).abs() < 1e-12);
        assert!((c[0].depth - 0.5 * s).abs() < 1e-12);
        t.contacts([0.5, 0.6], &mut c);
        assert!(c.is_empty());
    }

    #[test]
    fn channel_walls_step() {
        let t = TerrainSpec::Channel { floor: 0.0, left_x: 0.0, right_x: 0.7, step_height: 0.2, step_depth: 0.05 };
        assert_eq!(t.walls_at(0.1), Some((0.0, 0.7)));
        let (l, r) = t.walls_at(0.3).unwrap();
        assert!((l - 0.05).abs() < 1e-12 && (r - 0.65).abs() < 1e-12);
        assert_eq!(t.walls_at(0.5), Some((0.0, 0.7)));
        let mut c = Vec::new();
        t.contacts([-0.01, -0.02], &mut c);
        assert_eq!(c.len(), 2);
        t.contacts([0.3, 0.3], &mut c);
        assert!(c.is_empty());
    }

    #[test]
    fn json_tagged() {
        let t = TerrainSpec::Flat { height: 0.0 };
        assert_eq!(serde_json::to_string(&t).unwrap(), r#"{"kind":"flat","height":0.0}"#);
    }
}
