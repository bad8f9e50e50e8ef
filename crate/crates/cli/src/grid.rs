use std::io::{self, Write};

/// Points of the simplex with coordinates in multiples of `1/k`, in
/// lexicographic order of their integer numerators.
pub fn simplex_grid(n: usize, k: usize) -> Vec<Vec<usize>> {
    fn rec(n: usize, left: usize, prefix: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if prefix.len() + 1 == n {
            prefix.push(left);
            out.push(prefix.clone());
            prefix.pop();
            return;
        }
        for v in 0..=left {
            prefix.push(v);
            rec(n, left - v, prefix, out);
            prefix.pop();
        }
    }
    let mut out = Vec::new();
    rec(n, k, &mut Vec::with_capacity(n), &mut out);
    out
}

/// Number of grid points, `C(k + n - 1, n - 1)`, saturating.
pub fn grid_size(n: usize, k: usize) -> u128 {
    let mut c: u128 = 1;
    for i in 1..n as u128 {
        c = c.saturating_mul(k as u128 + i) / i;
    }
    c
}

/// One row per grid point: coordinates, set value, membership margin, and
/// whether the point is inside and next to an outside point.
pub fn write_set_csv(
    w: &mut impl Write,
    n: usize,
    k: usize,
    value: impl Fn(&[f64]) -> f64,
    margin: impl Fn(&[f64]) -> f64,
) -> io::Result<()> {
    let pts = simplex_grid(n, k);
    let coords: Vec<Vec<f64>> = pts.iter().map(|p| p.iter().map(|&v| v as f64 / k as f64).collect()).collect();
    let margins: Vec<f64> = coords.iter().map(|b| margin(b)).collect();
    let index: std::collections::HashMap<&[usize], usize> = pts.iter().enumerate().map(|(i, p)| (p.as_slice(), i)).collect();
    let names: Vec<String> = (1..=n).map(|i| format!("b{i}")).collect();
    writeln!(w, "{},value,margin,inside,boundary", names.join(","))?;
    for (i, p) in pts.iter().enumerate() {
        let inside = margins[i] >= 0.0;
        // Neighbors move 1/k of mass between two coordinates.
        let mut boundary = false;
        if inside {
            let mut q = p.clone();
            'outer: for a in 0..n {
                for b in 0..n {
                    if a != b && q[a] > 0 {
                        q[a] -= 1;
                        q[b] += 1;
                        let out = margins[index[q.as_slice()]] < 0.0;
                        q[a] += 1;
                        q[b] -= 1;
                        if out {
                            boundary = true;
                            break 'outer;
                        }
                    }
                }
            }
        }
        let vals: Vec<String> = coords[i].iter().map(f64::to_string).collect();
        writeln!(w, "{},{},{},{},{}", vals.join(","), value(&coords[i]), margins[i], u8::from(inside), u8::from(boundary))?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_enumerates_every_lattice_point_once() {
        for (n, k) in [(1, 5), (2, 4), (3, 6), (4, 3)] {
            let g = simplex_grid(n, k);
            assert_eq!(g.len() as u128, grid_size(n, k));
            assert!(g.iter().all(|p| p.len() == n && p.iter().sum::<usize>() == k));
            let mut sorted = g.clone();
            sorted.dedup();
            assert_eq!(sorted.len(), g.len());
        }
    }

    #[test]
    fn boundary_marks_inside_points_next_to_outside_ones() {
        let mut out = Vec::new();
        // Inside iff b1 <= 0.5 on the segment.
        write_set_csv(&mut out, 2, 4, |b| b[0], |b| 0.5 - b[0]).unwrap();
        let text = String::from_utf8(out).unwrap();
        let rows: Vec<&str> = text.lines().skip(1).collect();
        assert_eq!(rows, ["0,1,0,0.5,1,0", "0.25,0.75,0.25,0.25,1,0", "0.5,0.5,0.5,0,1,1", "0.75,0.25,0.75,-0.25,0,0", "1,0,1,-0.5,0,0"]);
    }
}
