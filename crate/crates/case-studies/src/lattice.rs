use pomdp_core::{Belief, Pomdp};

use crate::CaseStudyError;

/// A `height x width` grid of hypotheses with 1-based `(row, column)` cells.
/// Every cell is also an example: showing example `x` rules out hypothesis `x`.
/// A contradicted learner jumps uniformly to the l1-nearest remaining cells; an
/// uncontradicted one stays. The label is `+1` iff the learner's new
/// hypothesis is the target.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LatticeTeachingSpec {
    pub width: usize,
    pub height: usize,
    pub initial: (usize, usize),
    pub target: (usize, usize),
}

impl LatticeTeachingSpec {
    pub fn num_cells(&self) -> usize {
        self.width * self.height
    }

    /// State index of a 1-based cell.
    pub fn index(&self, (r, c): (usize, usize)) -> usize {
        (r - 1) * self.width + (c - 1)
    }

    pub fn cell(&self, i: usize) -> (usize, usize) {
        (i / self.width + 1, i % self.width + 1)
    }

    fn contains(&self, (r, c): (usize, usize)) -> bool {
        (1..=self.height).contains(&r) && (1..=self.width).contains(&c)
    }

    fn l1(&self, i: usize, j: usize) -> usize {
        let (a, b) = (self.cell(i), self.cell(j));
        a.0.abs_diff(b.0) + a.1.abs_diff(b.1)
    }
}

pub fn build_lattice_pomdp(spec: &LatticeTeachingSpec) -> Result<Pomdp, CaseStudyError> {
    if spec.width == 0 || spec.height == 0 {
        return Err(CaseStudyError::InvalidSpec("lattice must be nonempty".into()));
    }
    if !spec.contains(spec.initial) || !spec.contains(spec.target) {
        return Err(CaseStudyError::InvalidSpec("initial and target hypotheses must lie on the lattice".into()));
    }
    if spec.initial == spec.target {
        return Err(CaseStudyError::InvalidSpec("initial and target hypotheses must differ".into()));
    }
    let n = spec.num_cells();
    let mut transition = Vec::with_capacity(n);
    for x in 0..n {
        let mut t = vec![vec![0.0; n]; n];
        for j in 0..n {
            if j != x {
                t[j][j] = 1.0;
                continue;
            }
            let best = (0..n).filter(|&i| i != x).map(|i| spec.l1(i, j)).min().expect("at least two cells");
            let nearest: Vec<usize> = (0..n).filter(|&i| i != x && spec.l1(i, j) == best).collect();
            let w = 1.0 / nearest.len() as f64;
            for i in nearest {
                t[i][j] = w;
            }
        }
        transition.push(t);
    }
    let target = spec.index(spec.target);
    let labels: Vec<Vec<f64>> = (0..n).map(|q| if q == target { vec![0.0, 1.0] } else { vec![1.0, 0.0] }).collect();
    let name = |prefix: &str, i: usize| {
        let (r, c) = spec.cell(i);
        format!("{prefix}{r}_{c}")
    };
    Ok(Pomdp::new(
        (0..n).map(|i| name("h", i)).collect(),
        (0..n).map(|i| name("x", i)).collect(),
        vec!["neg".into(), "pos".into()],
        transition,
        vec![labels; n],
        Belief::vertex(n, spec.index(spec.initial)),
    )?)
}
