//! Conic program intermediate representation: a linear objective over one
//! variable vector, equality rows, and a product of small second-order cone
//! blocks, each an affine map of the variables. Kept backend-agnostic so the
//! interior-point solver stays an implementation seam, and dumpable as text
//! for differential testing against external modeling tools.

use std::io::{self, Write};

use crate::sparse::SparseOperator;

/// Affine expression `terms · x + constant`.
#[derive(Debug, Clone, Default)]
pub struct LinearExpr {
    pub terms: Vec<(usize, f64)>,
    pub constant: f64,
}

impl LinearExpr {
    pub fn constant(c: f64) -> Self {
        Self { terms: Vec::new(), constant: c }
    }

    pub fn unit(var: usize) -> Self {
        Self { terms: vec![(var, 1.0)], constant: 0.0 }
    }

    /// Copies one operator row as an expression.
    pub fn from_row(op: &SparseOperator, row: usize) -> Self {
        Self { terms: op.row(row).collect(), constant: 0.0 }
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        self.terms.iter().map(|&(i, c)| c * x[i]).sum::<f64>() + self.constant
    }

    pub fn max_var(&self) -> Option<usize> {
        self.terms.iter().map(|&(i, _)| i).max()
    }
}

/// Which sample point of a face a cone block constrains.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SampleKind {
    Corner(u8),
    MidEdge(u8),
    Barycenter,
    /// The single per-face gradient-bound cone of the linear baseline.
    FaceGradient,
}

impl SampleKind {
    /// Per-face sample index in [0, 7) for the quadratic program.
    pub fn from_sample_index(s: usize) -> Self {
        match s {
            0..=2 => SampleKind::Corner(s as u8),
            3..=5 => SampleKind::MidEdge((s - 3) as u8),
            _ => SampleKind::Barycenter,
        }
    }
}

#[derive(Debug, Clone, Copy)]
pub struct BlockMeta {
    pub face: usize,
    pub sample: SampleKind,
}

/// One cone block over affine expressions of the variables.
#[derive(Debug, Clone)]
pub enum ConeBlock {
    /// Rotated second-order cone `2·x·y ≥ ‖z‖²`, `x, y ≥ 0`.
    Rotated { x: LinearExpr, y: LinearExpr, z: [LinearExpr; 2], meta: BlockMeta },
    /// Standard second-order cone `t ≥ ‖z‖`.
    Soc { t: LinearExpr, z: [LinearExpr; 2], meta: BlockMeta },
}

impl ConeBlock {
    pub fn meta(&self) -> BlockMeta {
        match self {
            ConeBlock::Rotated { meta, .. } | ConeBlock::Soc { meta, .. } => *meta,
        }
    }

    /// Slack of the block at a point, in its natural units: for a rotated
    /// block `x·y/2·…` we report `x − ‖z‖²/(2y)` (which is `u − ¼|∇u|²` for
    /// the distance cones), for a standard block `t − ‖z‖`.
    pub fn slack(&self, xval: &[f64]) -> f64 {
        match self {
            ConeBlock::Rotated { x, y, z, .. } => {
                let zx = z[0].eval(xval);
                let zy = z[1].eval(xval);
                x.eval(xval) - (zx * zx + zy * zy) / (2.0 * y.eval(xval))
            }
            ConeBlock::Soc { t, z, .. } => {
                let zx = z[0].eval(xval);
                let zy = z[1].eval(xval);
                t.eval(xval) - (zx * zx + zy * zy).sqrt()
            }
        }
    }

    fn exprs(&self) -> Vec<&LinearExpr> {
        match self {
            ConeBlock::Rotated { x, y, z, .. } => vec![x, y, &z[0], &z[1]],
            ConeBlock::Soc { t, z, .. } => vec![t, &z[0], &z[1]],
        }
    }
}

/// Equality `lhs(x) = rhs`.
#[derive(Debug, Clone)]
pub struct Equality {
    pub lhs: LinearExpr,
    pub rhs: f64,
}

/// A linear-objective problem over a product of second-order cones.
#[derive(Debug, Clone)]
pub struct ConicProgram {
    pub n_vars: usize,
    /// Minimized: `objective · x`.
    pub objective: Vec<f64>,
    pub equalities: Vec<Equality>,
    pub cones: Vec<ConeBlock>,
}

impl ConicProgram {
    /// Structural checks: objective length and variable indices.
    pub fn validate(&self) -> Result<(), String> {
        if self.objective.len() != self.n_vars {
            return Err(format!(
                "objective length {} != n_vars {}",
                self.objective.len(),
                self.n_vars
            ));
        }
        let check = |e: &LinearExpr, what: &str| -> Result<(), String> {
            match e.max_var() {
                Some(i) if i >= self.n_vars => {
                    Err(format!("{what} references variable {i} >= n_vars {}", self.n_vars))
                }
                _ => Ok(()),
            }
        };
        for (k, eq) in self.equalities.iter().enumerate() {
            check(&eq.lhs, &format!("equality {k}"))?;
        }
        for (k, block) in self.cones.iter().enumerate() {
            for e in block.exprs() {
                check(e, &format!("cone {k}"))?;
            }
        }
        Ok(())
    }

    /// Worst absolute equality residual at a point.
    pub fn equality_residual(&self, x: &[f64]) -> f64 {
        self.equalities
            .iter()
            .map(|eq| (eq.lhs.eval(x) - eq.rhs).abs())
            .fold(0.0, f64::max)
    }

    /// Smallest cone slack at a point (negative means violation).
    pub fn min_cone_slack(&self, x: &[f64]) -> f64 {
        self.cones.iter().map(|b| b.slack(x)).fold(f64::INFINITY, f64::min)
    }

    /// Self-describing text dump: objective, equalities, cone blocks.
    pub fn write_dump<W: Write>(&self, w: &mut W) -> io::Result<()> {
        writeln!(w, "conic-program n_vars={}", self.n_vars)?;
        write!(w, "minimize:")?;
        for (i, c) in self.objective.iter().enumerate() {
            if *c != 0.0 {
                write!(w, " {:+}*x{}", c, i)?;
            }
        }
        writeln!(w)?;
        let fmt = |e: &LinearExpr| -> String {
            let mut s = String::new();
            for &(i, c) in &e.terms {
                s.push_str(&format!("{:+}*x{} ", c, i));
            }
            if e.constant != 0.0 || e.terms.is_empty() {
                s.push_str(&format!("{:+}", e.constant));
            }
            s.trim_end().to_string()
        };
        for eq in &self.equalities {
            writeln!(w, "eq: {} = {}", fmt(&eq.lhs), eq.rhs)?;
        }
        for block in &self.cones {
            let meta = block.meta();
            match block {
                ConeBlock::Rotated { x, y, z, .. } => writeln!(
                    w,
                    "rotated-soc face={} sample={:?}: x: {} | y: {} | z0: {} | z1: {}",
                    meta.face,
                    meta.sample,
                    fmt(x),
                    fmt(y),
                    fmt(&z[0]),
                    fmt(&z[1]),
                )?,
                ConeBlock::Soc { t, z, .. } => writeln!(
                    w,
                    "soc face={} sample={:?}: t: {} | z0: {} | z1: {}",
                    meta.face,
                    meta.sample,
                    fmt(t),
                    fmt(&z[0]),
                    fmt(&z[1]),
                )?,
            }
        }
        Ok(())
    }
}
