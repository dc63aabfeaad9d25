//! Moore-neighbour border following over 8-connected foreground regions.

use std::collections::{HashSet, VecDeque};

use super::{BinaryImage, Contour, Point2, Shape};
use crate::{Error, Result, Scalar};

pub const DEFAULT_FG_THRESHOLD: u8 = 128;

/// Clockwise (y down) starting west.
const RING: [(isize, isize); 8] = [(-1, 0), (-1, -1), (0, -1), (1, -1), (1, 0), (1, 1), (0, 1), (-1, 1)];

struct Grid<'a> {
    img: &'a BinaryImage,
    threshold: u8,
}

impl Grid<'_> {
    fn fg(&self, x: isize, y: isize) -> bool {
        x >= 0
            && y >= 0
            && (x as usize) < self.img.width
            && (y as usize) < self.img.height
            && self.img.get(x as usize, y as usize) >= self.threshold
    }

    fn idx(&self, x: usize, y: usize) -> usize {
        y * self.img.width + x
    }
}

/// Labels 8-connected foreground components in row-major discovery order.
fn label_foreground(g: &Grid) -> (Vec<Option<usize>>, Vec<(usize, usize)>) {
    let (w, h) = (g.img.width, g.img.height);
    let mut labels = vec![None; w * h];
    let mut seeds = Vec::new();
    let mut queue = VecDeque::new();
    for y in 0..h {
        for x in 0..w {
            if labels[g.idx(x, y)].is_some() || !g.fg(x as isize, y as isize) {
                continue;
            }
            let id = seeds.len();
            seeds.push((x, y));
            labels[g.idx(x, y)] = Some(id);
            queue.push_back((x, y));
            while let Some((cx, cy)) = queue.pop_front() {
                for (dx, dy) in RING {
                    let (nx, ny) = (cx as isize + dx, cy as isize + dy);
                    if g.fg(nx, ny) && labels[g.idx(nx as usize, ny as usize)].is_none() {
                        labels[g.idx(nx as usize, ny as usize)] = Some(id);
                        queue.push_back((nx as usize, ny as usize));
                    }
                }
            }
        }
    }
    (labels, seeds)
}

/// First-scanned pixel of every 4-connected background region that does not
/// reach the image border, i.e. every hole.
fn hole_seeds(g: &Grid) -> Vec<(usize, usize)> {
    let (w, h) = (g.img.width, g.img.height);
    let mut seen = vec![false; w * h];
    let mut holes = Vec::new();
    let mut queue = VecDeque::new();
    for y in 0..h {
        for x in 0..w {
            if seen[g.idx(x, y)] || g.fg(x as isize, y as isize) {
                continue;
            }
            seen[g.idx(x, y)] = true;
            queue.push_back((x, y));
            let mut touches_border = false;
            while let Some((cx, cy)) = queue.pop_front() {
                for (dx, dy) in [(1isize, 0isize), (-1, 0), (0, 1), (0, -1)] {
                    let (nx, ny) = (cx as isize + dx, cy as isize + dy);
                    if nx < 0 || ny < 0 || nx as usize >= w || ny as usize >= h {
                        touches_border = true;
                        continue;
                    }
                    let (nx, ny) = (nx as usize, ny as usize);
                    if !seen[g.idx(nx, ny)] && !g.fg(nx as isize, ny as isize) {
                        seen[g.idx(nx, ny)] = true;
                        queue.push_back((nx, ny));
                    }
                }
            }
            if !touches_border {
                holes.push((x, y));
            }
        }
    }
    holes
}

/// Moore-neighbour tracing from `start` with background neighbour `back`,
/// stopped by Jacob's criterion (re-entering `start` from `back`).
fn moore_trace(g: &Grid, start: (isize, isize), back: (isize, isize)) -> Vec<(isize, isize)> {
    let mut boundary = vec![start];
    let (mut p, mut b) = (start, back);
    let mut states = HashSet::new();
    states.insert((p, b));
    loop {
        let from = RING
            .iter()
            .position(|&(dx, dy)| (p.0 + dx, p.1 + dy) == b)
            .expect("backtrack pixel is a Moore neighbour");
        let next = (1..=8).find_map(|k| {
            let (dx, dy) = RING[(from + k) % 8];
            let c = (p.0 + dx, p.1 + dy);
            g.fg(c.0, c.1).then(|| {
                let (bx, by) = RING[(from + k - 1) % 8];
                (c, (p.0 + bx, p.1 + by))
            })
        });
        let Some((np, nb)) = next else {
            break; // isolated pixel
        };
        if (np, nb) == (start, back) || !states.insert((np, nb)) {
            break;
        }
        p = np;
        b = nb;
        if boundary.last() != Some(&p) {
            boundary.push(p);
        }
    }
    boundary
}

/// Extracts outer and hole boundaries of every 8-connected component whose
/// pixels are `>= fg_threshold`.
///
/// Components are ordered by their first pixel in row-major order; each
/// component contributes its outer boundary followed by its hole boundaries.
/// Points repeated across contours are removed (first occurrence wins).
pub fn extract_contours<T: Scalar>(img: &BinaryImage, fg_threshold: u8) -> Result<Shape<T>> {
    let g = Grid { img, threshold: fg_threshold };
    let (labels, seeds) = label_foreground(&g);
    if seeds.is_empty() {
        return Err(Error::EmptyShape);
    }
    let mut holes_of: Vec<Vec<(usize, usize)>> = vec![Vec::new(); seeds.len()];
    for (hx, hy) in hole_seeds(&g) {
        // the pixel above a hole's first-scanned pixel is foreground
        let owner = labels[g.idx(hx, hy - 1)].expect("hole is bounded above by foreground");
        holes_of[owner].push((hx, hy));
    }

    let to_contour = |trace: Vec<(isize, isize)>| {
        Contour::closed(trace.into_iter().map(|(x, y)| Point2::new(T::count(x as usize), T::count(y as usize))).collect())
    };
    let mut contours = Vec::new();
    for (id, &(sx, sy)) in seeds.iter().enumerate() {
        let s = (sx as isize, sy as isize);
        contours.push(to_contour(moore_trace(&g, s, (s.0 - 1, s.1))));
        for &(hx, hy) in &holes_of[id] {
            let (hx, hy) = (hx as isize, hy as isize);
            contours.push(to_contour(moore_trace(&g, (hx, hy - 1), (hx, hy))));
        }
    }
    Ok(Shape::new(contours).dedup())
}
