//! Point and segment listings of the Pareto set, with an SVG drawing for n = 2.

use std::fmt::Write as _;

use molp_core::model::MolpProblem;
use molp_core::oracle::enumerate_vertices;
use molp_core::rational::{format_rational, to_f64};
use molp_core::Rational;

fn header(n: usize, prefix: &str) -> Vec<String> {
    (1..=n).map(|j| format!("{}x{}", prefix, j)).collect()
}

/// `id,x1..xn,exact_x1..exact_xn`, one row per point.
pub fn points_csv(points: &[Vec<Rational>], n: usize) -> String {
    let mut s = String::new();
    let mut h = vec!["id".to_string()];
    h.extend(header(n, ""));
    h.extend(header(n, "exact_"));
    let _ = writeln!(s, "{}", h.join(","));
    for (i, p) in points.iter().enumerate() {
        let mut row = vec![i.to_string()];
        row.extend(p.iter().map(|v| format!("{}", to_f64(v))));
        row.extend(p.iter().map(format_rational));
        let _ = writeln!(s, "{}", row.join(","));
    }
    s
}

/// `from,to,from_x1..,to_x1..`, one row per segment.
pub fn edges_csv(points: &[Vec<Rational>], edges: &[(usize, usize)], n: usize) -> String {
    let mut s = String::new();
    let mut h = vec!["from".to_string(), "to".to_string()];
    h.extend(header(n, "from_"));
    h.extend(header(n, "to_"));
    let _ = writeln!(s, "{}", h.join(","));
    for &(a, b) in edges {
        let mut row = vec![a.to_string(), b.to_string()];
        row.extend(points[a].iter().map(|v| format!("{}", to_f64(v))));
        row.extend(points[b].iter().map(|v| format!("{}", to_f64(v))));
        let _ = writeln!(s, "{}", row.join(","));
    }
    s
}

/// Feasible polygon in grey, Pareto points and segments in black. `None` unless n = 2.
pub fn svg(problem: &MolpProblem, points: &[Vec<Rational>], edges: &[(usize, usize)]) -> Option<String> {
    if problem.n() != 2 {
        return None;
    }
    let verts: Vec<(f64, f64)> = enumerate_vertices(problem).points.iter().map(|p| (to_f64(&p[0]), to_f64(&p[1]))).collect();
    let pts: Vec<(f64, f64)> = points.iter().map(|p| (to_f64(&p[0]), to_f64(&p[1]))).collect();
    let all: Vec<&(f64, f64)> = verts.iter().chain(&pts).collect();
    let (mut x0, mut x1, mut y0, mut y1) = (0.0f64, 1.0f64, 0.0f64, 1.0f64);
    for p in &all {
        x0 = x0.min(p.0);
        x1 = x1.max(p.0);
        y0 = y0.min(p.1);
        y1 = y1.max(p.1);
    }
    let (w, h, pad) = (400.0, 400.0, 30.0);
    let sx = (w - 2.0 * pad) / (x1 - x0);
    let sy = (h - 2.0 * pad) / (y1 - y0);
    let map = |p: &(f64, f64)| (pad + (p.0 - x0) * sx, h - pad - (p.1 - y0) * sy);
    let mut s = String::new();
    let _ = writeln!(s, r#"<svg xmlns="http://www.w3.org/2000/svg" width="{w}" height="{h}" viewBox="0 0 {w} {h}">"#);
    let _ = writeln!(s, r#"<rect width="{w}" height="{h}" fill="white"/>"#);
    if verts.len() >= 3 {
        let cx = verts.iter().map(|p| p.0).sum::<f64>() / verts.len() as f64;
        let cy = verts.iter().map(|p| p.1).sum::<f64>() / verts.len() as f64;
        let mut ordered = verts.clone();
        ordered.sort_by(|a, b| (a.1 - cy).atan2(a.0 - cx).partial_cmp(&(b.1 - cy).atan2(b.0 - cx)).unwrap_or(std::cmp::Ordering::Equal));
        let poly: Vec<String> = ordered.iter().map(|p| {
            let (a, b) = map(p);
            format!("{:.2},{:.2}", a, b)
        }).collect();
        let _ = writeln!(s, r#"<polygon points="{}" fill="gainsboro" stroke="gray"/>"#, poly.join(" "));
    }
    let (ax, ay) = map(&(x0, y0));
    let _ = writeln!(s, r#"<line x1="{ax:.2}" y1="{ay:.2}" x2="{:.2}" y2="{ay:.2}" stroke="dimgray"/>"#, map(&(x1, y0)).0);
    let _ = writeln!(s, r#"<line x1="{ax:.2}" y1="{ay:.2}" x2="{ax:.2}" y2="{:.2}" stroke="dimgray"/>"#, map(&(x0, y1)).1);
    for &(a, b) in edges {
        let (p, q) = (map(&pts[a]), map(&pts[b]));
        let _ = writeln!(s, r#"<line x1="{:.2}" y1="{:.2}" x2="{:.2}" y2="{:.2}" stroke="black" stroke-width="2"/>"#, p.0, p.1, q.0, q.1);
    }
    for (p, exact) in pts.iter().zip(points) {
        let (a, b) = map(p);
        let _ = writeln!(s, r#"<circle cx="{a:.2}" cy="{b:.2}" r="4" fill="black"/>"#);
        let _ = writeln!(s, r#"<text x="{:.2}" y="{:.2}" font-size="11">({}, {})</text>"#, a + 6.0, b - 6.0, format_rational(&exact[0]), format_rational(&exact[1]));
    }
    s.push_str("</svg>\n");
    Some(s)
}
