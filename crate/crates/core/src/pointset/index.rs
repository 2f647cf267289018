//! Numeric neighbour queries over a point cloud sorted by first coordinate.

/// Points sorted along the first axis; ball queries scan the slab
/// `|x₀ − c₀| ≤ r`.
#[derive(Clone, Debug)]
pub struct SlabIndex {
    dim: usize,
    order: Vec<usize>,
    coords: Vec<f64>,
    keys: Vec<f64>,
}

impl SlabIndex {
    pub fn new(points: &[Vec<f64>]) -> Self {
        let dim = points.first().map_or(1, Vec::len);
        let mut order: Vec<usize> = (0..points.len()).collect();
        order.sort_by(|&a, &b| points[a][0].total_cmp(&points[b][0]).then(a.cmp(&b)));
        let coords: Vec<f64> = order.iter().flat_map(|&i| points[i].iter().copied()).collect();
        let keys = order.iter().map(|&i| points[i][0]).collect();
        SlabIndex {
            dim,
            order,
            coords,
            keys,
        }
    }

    pub fn len(&self) -> usize {
        self.order.len()
    }

    pub fn is_empty(&self) -> bool {
        self.order.is_empty()
    }

    fn at(&self, pos: usize) -> &[f64] {
        &self.coords[pos * self.dim..(pos + 1) * self.dim]
    }

    fn slab(&self, lo: f64, hi: f64) -> std::ops::Range<usize> {
        let a = self.keys.partition_point(|&k| k < lo);
        let b = self.keys.partition_point(|&k| k <= hi);
        a..b
    }

    fn dist2(&self, pos: usize, c: &[f64]) -> f64 {
        self.at(pos).iter().zip(c).map(|(x, y)| (x - y) * (x - y)).sum()
    }

    /// Number of points with `|x − c| ≤ r`.
    pub fn count_ball(&self, c: &[f64], r: f64) -> usize {
        let range = self.slab(c[0] - r, c[0] + r);
        if self.dim == 1 {
            return range.len();
        }
        let r2 = r * r;
        range.filter(|&p| self.dist2(p, c) <= r2).count()
    }

    /// Original indices of points with `|x − c| ≤ r`.
    pub fn ball(&self, c: &[f64], r: f64) -> Vec<usize> {
        let r2 = r * r;
        self.slab(c[0] - r, c[0] + r)
            .filter(|&p| self.dist2(p, c) <= r2)
            .map(|p| self.order[p])
            .collect()
    }

    /// Nearest point (original index, distance); ties go to the smaller
    /// original index.
    pub fn nearest(&self, c: &[f64]) -> Option<(usize, f64)> {
        if self.is_empty() {
            return None;
        }
        let start = self.keys.partition_point(|&k| k < c[0]);
        let mut best: Option<(usize, f64)> = None;
        let better = |best: &Option<(usize, f64)>, idx: usize, d2: f64| match best {
            None => true,
            Some((bi, bd)) => d2 < *bd || (d2 == *bd && idx < *bi),
        };
        let mut up = start;
        let mut down = start;
        loop {
            let bound = best.map_or(f64::INFINITY, |b| b.1);
            let mut progressed = false;
            if up < self.len() {
                let dx = self.keys[up] - c[0];
                if dx * dx <= bound {
                    let d2 = self.dist2(up, c);
                    if better(&best, self.order[up], d2) {
                        best = Some((self.order[up], d2));
                    }
                    up += 1;
                    progressed = true;
                }
            }
            if down > 0 {
                let dx = c[0] - self.keys[down - 1];
                if dx * dx <= best.map_or(f64::INFINITY, |b| b.1) {
                    down -= 1;
                    let d2 = self.dist2(down, c);
                    if better(&best, self.order[down], d2) {
                        best = Some((self.order[down], d2));
                    }
                    progressed = true;
                }
            }
            if !progressed {
                break;
            }
        }
        best.map(|(i, d2)| (i, d2.sqrt()))
    }

    /// Smallest pairwise distance and the pair (original indices).
    pub fn closest_pair(&self) -> Option<(usize, usize, f64)> {
        let n = self.len();
        let mut best: Option<(usize, usize, f64)> = None;
        for i in 0..n {
            for j in i + 1..n {
                let dx = self.keys[j] - self.keys[i];
                if let Some((_, _, b)) = best {
                    if dx * dx > b {
                        break;
                    }
                }
                let d2 = self.dist2(j, self.at(i));
                if best.map_or(true, |(_, _, b)| d2 < b) {
                    best = Some((self.order[i], self.order[j], d2));
                }
            }
        }
        best.map(|(a, b, d2)| (a.min(b), a.max(b), d2.sqrt()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn queries_match_brute_force() {
        let pts: Vec<Vec<f64>> = (0..200)
            .map(|i| {
                let t = i as f64;
                vec![(t * 0.7548).fract() * 20.0 - 10.0, (t * 0.5698).fract() * 20.0 - 10.0]
            })
            .collect();
        let idx = SlabIndex::new(&pts);
        let d = |a: &[f64], b: &[f64]| ((a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2)).sqrt();
        for c in [[0.0, 0.0], [3.3, -7.1], [-12.0, 4.0]] {
            let brute = pts.iter().filter(|p| d(p, &c) <= 2.5).count();
            assert_eq!(idx.count_ball(&c, 2.5), brute);
            let (ni, nd) = idx.nearest(&c).unwrap();
            let bd = pts.iter().map(|p| d(p, &c)).fold(f64::INFINITY, f64::min);
            assert_eq!(nd, bd);
            assert_eq!(d(&pts[ni], &c), bd);
        }
        let (_, _, g) = idx.closest_pair().unwrap();
        let mut bg = f64::INFINITY;
        for i in 0..pts.len() {
            for j in i + 1..pts.len() {
                bg = bg.min(d(&pts[i], &pts[j]));
            }
        }
        assert_eq!(g, bg);
    }
}
