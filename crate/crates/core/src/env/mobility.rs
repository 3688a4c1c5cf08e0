//! Devices moving counterclockwise around a rectangle centred on the edge server.

use rand::Rng;

use crate::config::MobilityParams;

#[derive(Debug, Clone, PartialEq)]
pub struct MobilityModel {
    width: f64,
    height: f64,
    step: f64,
    /// Arc length of each device along the perimeter, measured counterclockwise
    /// from the bottom-left corner.
    positions: Vec<f64>,
}

impl MobilityModel {
    /// Places devices at the given arc lengths (wrapped onto the perimeter).
    pub fn with_positions(params: &MobilityParams, positions: Vec<f64>) -> Self {
        let mut m = Self {
            width: params.rect_width_m,
            height: params.rect_height_m,
            step: params.step_m,
            positions,
        };
        let p = m.perimeter();
        for s in &mut m.positions {
            *s = s.rem_euclid(p);
        }
        m
    }

    /// Uniform random starting points on the bottom (width-long) edge.
    pub fn random_on_bottom_edge<R: Rng>(params: &MobilityParams, n: usize, rng: &mut R) -> Self {
        let positions = (0..n).map(|_| rng.gen::<f64>() * params.rect_width_m).collect();
        Self::with_positions(params, positions)
    }

    pub fn perimeter(&self) -> f64 {
        2.0 * (self.width + self.height)
    }

    pub fn positions(&self) -> &[f64] {
        &self.positions
    }

    /// Cartesian point at arc length `s`, server at the origin.
    pub fn point(&self, s: f64) -> (f64, f64) {
        let (w, h) = (self.width, self.height);
        let (hw, hh) = (w / 2.0, h / 2.0);
        let s = s.rem_euclid(self.perimeter());
        if s < w {
            (-hw + s, -hh)
        } else if s < w + h {
            (hw, -hh + (s - w))
        } else if s < 2.0 * w + h {
            (hw - (s - w - h), hh)
        } else {
            (-hw, hh - (s - 2.0 * w - h))
        }
    }

    /// Euclidean distances from every device to the server.
    pub fn distances(&self) -> Vec<f64> {
        self.positions
            .iter()
            .map(|&s| {
                let (x, y) = self.point(s);
                x.hypot(y)
            })
            .collect()
    }

    /// Moves every device one step and returns the new distances.
    pub fn advance(&mut self) -> Vec<f64> {
        let p = self.perimeter();
        for s in &mut self.positions {
            *s = (*s + self.step).rem_euclid(p);
        }
        self.distances()
    }
}
