use super::SpdOperator;
use crate::dense::DenseMatrix;
use crate::error::{Error, Result};
use crate::system::SaddlePointSystem;
use serde::{Deserialize, Serialize};
use std::fmt;
use std::str::FromStr;

/// Parameters `(Λ1, Λ2, Λ3, s, t)` of the preconditioner
///
/// ```text
///   P = [ Λ1 + tA   sBᵀ    0  ]
///       [ -sB       Λ2   -sCᵀ ]
///       [ 0         sC     Λ3 ]
/// ```
#[derive(Debug, Clone, PartialEq)]
pub struct GssConfig {
    pub lambda1: SpdOperator,
    pub lambda2: SpdOperator,
    pub lambda3: SpdOperator,
    pub s: f64,
    pub t: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum GssKind {
    Pess,
    Lpess,
    Ss,
    Rss,
    Egss,
    Rpgss,
}

impl GssKind {
    pub const ALL: [GssKind; 6] = [
        GssKind::Pess,
        GssKind::Lpess,
        GssKind::Ss,
        GssKind::Rss,
        GssKind::Egss,
        GssKind::Rpgss,
    ];

    pub fn name(self) -> &'static str {
        match self {
            GssKind::Pess => "PESS",
            GssKind::Lpess => "LPESS",
            GssKind::Ss => "SS",
            GssKind::Rss => "RSS",
            GssKind::Egss => "EGSS",
            GssKind::Rpgss => "RPGSS",
        }
    }
}

impl fmt::Display for GssKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for GssKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        GssKind::ALL
            .into_iter()
            .find(|k| k.name().eq_ignore_ascii_case(s))
            .ok_or_else(|| Error::InvalidArgument(format!("unknown preconditioner kind `{s}`")))
    }
}

/// Kind-specific parameters. The 1/2 prefactors of the classical variants are
/// folded into the Λ blocks, which leaves right-preconditioned GMRES iterates
/// unchanged.
#[derive(Debug, Clone, PartialEq)]
pub enum GssSpec {
    Pess {
        lambda1: SpdOperator,
        lambda2: SpdOperator,
        lambda3: SpdOperator,
        s: f64,
    },
    /// The (1,1) block is `sA` with no Λ1 term.
    Lpess {
        lambda2: SpdOperator,
        lambda3: SpdOperator,
        s: f64,
    },
    Ss {
        alpha: f64,
    },
    Rss {
        alpha: f64,
    },
    Egss {
        alpha: f64,
        beta: f64,
        gamma: f64,
        p: SpdOperator,
        q: SpdOperator,
        w: SpdOperator,
    },
    Rpgss {
        beta: f64,
        gamma: f64,
        q: SpdOperator,
        w: SpdOperator,
    },
}

impl GssSpec {
    pub fn kind(&self) -> GssKind {
        match self {
            GssSpec::Pess { .. } => GssKind::Pess,
            GssSpec::Lpess { .. } => GssKind::Lpess,
            GssSpec::Ss { .. } => GssKind::Ss,
            GssSpec::Rss { .. } => GssKind::Rss,
            GssSpec::Egss { .. } => GssKind::Egss,
            GssSpec::Rpgss { .. } => GssKind::Rpgss,
        }
    }
}

fn positive(name: &str, v: f64) -> Result<()> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidArgument(format!("{name} must be positive, got {v}")))
    }
}

/// Maps a variant onto the common `(Λ1, Λ2, Λ3, s, t)` form and validates it
/// against block dimensions `(n, m, p)`.
pub fn make_config(spec: GssSpec, dims: (usize, usize, usize)) -> Result<GssConfig> {
    let (n, m, p) = dims;
    let id = SpdOperator::scaled_identity;
    let cfg = match spec {
        GssSpec::Pess {
            lambda1,
            lambda2,
            lambda3,
            s,
        } => {
            if lambda1.is_zero() {
                return Err(Error::InvalidArgument("PESS needs an SPD Λ1".into()));
            }
            GssConfig {
                lambda1,
                lambda2,
                lambda3,
                s,
                t: s,
            }
        }
        GssSpec::Lpess { lambda2, lambda3, s } => GssConfig {
            lambda1: SpdOperator::Zero,
            lambda2,
            lambda3,
            s,
            t: s,
        },
        GssSpec::Ss { alpha } => {
            positive("alpha", alpha)?;
            GssConfig {
                lambda1: id(n, alpha / 2.0),
                lambda2: id(m, alpha / 2.0),
                lambda3: id(p, alpha / 2.0),
                s: 0.5,
                t: 0.5,
            }
        }
        GssSpec::Rss { alpha } => {
            positive("alpha", alpha)?;
            GssConfig {
                lambda1: SpdOperator::Zero,
                lambda2: id(m, alpha / 2.0),
                lambda3: id(p, alpha / 2.0),
                s: 0.5,
                t: 0.5,
            }
        }
        GssSpec::Egss {
            alpha,
            beta,
            gamma,
            p: pm,
            q,
            w,
        } => {
            positive("alpha", alpha)?;
            positive("beta", beta)?;
            positive("gamma", gamma)?;
            GssConfig {
                lambda1: pm.scale(alpha / 2.0),
                lambda2: q.scale(beta / 2.0),
                lambda3: w.scale(gamma / 2.0),
                s: 0.5,
                t: 0.5,
            }
        }
        GssSpec::Rpgss { beta, gamma, q, w } => {
            positive("beta", beta)?;
            positive("gamma", gamma)?;
            GssConfig {
                lambda1: SpdOperator::Zero,
                lambda2: q.scale(beta),
                lambda3: w.scale(gamma),
                s: 1.0,
                t: 1.0,
            }
        }
    };
    cfg.validate(dims)?;
    Ok(cfg)
}

impl GssConfig {
    /// Checks parameter signs, block orders and positive definiteness.
    pub fn validate(&self, dims: (usize, usize, usize)) -> Result<()> {
        let (n, m, p) = dims;
        positive("s", self.s)?;
        if !(self.t >= 0.0 && self.t.is_finite()) {
            return Err(Error::InvalidArgument(format!("t must be nonnegative, got {}", self.t)));
        }
        if self.lambda1.is_zero() && self.t <= 0.0 {
            return Err(Error::InvalidArgument("t must be positive when Λ1 is zero".into()));
        }
        for (name, op, order) in [("Λ1", &self.lambda1, n), ("Λ2", &self.lambda2, m), ("Λ3", &self.lambda3, p)] {
            match op.order() {
                None if name == "Λ1" => continue,
                None => return Err(Error::InvalidArgument(format!("{name} cannot be zero"))),
                Some(k) if k != order => {
                    return Err(Error::DimensionMismatch {
                        context: "Λ block order",
                        expected: order,
                        found: k,
                    })
                }
                Some(_) => {}
            }
            op.factor().map_err(|e| e.in_block(name))?;
        }
        Ok(())
    }

    /// `t = s` with an SPD Λ1.
    pub fn is_pess(&self) -> bool {
        !self.lambda1.is_zero() && self.t == self.s
    }

    /// `t = s` with Λ1 dropped. RSS and RPGSS are instances as well.
    pub fn is_lpess(&self) -> bool {
        self.lambda1.is_zero() && self.t == self.s
    }

    /// `P u` computed blockwise from the sparse blocks.
    pub fn apply_forward(&self, sys: &SaddlePointSystem, u: &[f64], out: &mut [f64]) {
        let (n, m, _) = sys.dims();
        let s = self.s;
        let (x, rest) = u.split_at(n);
        let (y, z) = rest.split_at(m);
        let (ox, rest) = out.split_at_mut(n);
        let (oy, oz) = rest.split_at_mut(m);
        let mut tn = vec![0.0; n];
        let mut tm = vec![0.0; m];
        let mut tp = vec![0.0; z.len()];

        // Λ1x + tAx + sBᵀy
        self.lambda1.apply_into(x, ox);
        sys.a().matvec_into(x, &mut tn);
        ox.iter_mut().zip(&tn).for_each(|(o, v)| *o += self.t * v);
        sys.b().matvec_transpose_into(y, &mut tn);
        ox.iter_mut().zip(&tn).for_each(|(o, v)| *o += s * v);

        // −sBx + Λ2y − sCᵀz
        self.lambda2.apply_into(y, oy);
        sys.b().matvec_into(x, &mut tm);
        oy.iter_mut().zip(&tm).for_each(|(o, v)| *o -= s * v);
        sys.c().matvec_transpose_into(z, &mut tm);
        oy.iter_mut().zip(&tm).for_each(|(o, v)| *o -= s * v);

        // sCy + Λ3z
        self.lambda3.apply_into(z, oz);
        sys.c().matvec_into(y, &mut tp);
        oz.iter_mut().zip(&tp).for_each(|(o, v)| *o += s * v);
    }

    /// The explicit matrix `P`, dense.
    pub fn dense_p(&self, sys: &SaddlePointSystem) -> Result<DenseMatrix> {
        let (n, m, p) = sys.dims();
        let s = self.s;
        let l1 = self.lambda1.to_dense(n).add_scaled(1.0, &sys.a().to_dense(), self.t)?;
        let b = sys.b().to_dense();
        let c = sys.c().to_dense();
        let mut out = DenseMatrix::zeros(n + m + p, n + m + p);
        out.set_block(0, 0, &l1);
        out.set_block(0, n, &b.transpose().scale(s));
        out.set_block(n, 0, &b.scale(-s));
        out.set_block(n, n, &self.lambda2.to_dense(m));
        out.set_block(n, n + m, &c.transpose().scale(-s));
        out.set_block(n + m, n, &c.scale(s));
        out.set_block(n + m, n + m, &self.lambda3.to_dense(p));
        Ok(out)
    }

    /// Short `key=value` description used in reports.
    pub fn describe(&self) -> String {
        fn block(op: &SpdOperator) -> String {
            match op {
                SpdOperator::Zero => "0".into(),
                SpdOperator::Diagonal(d) if d.windows(2).all(|w| w[0] == w[1]) => {
                    format!("{}I", d.first().copied().unwrap_or(0.0))
                }
                SpdOperator::Diagonal(_) => "diag".into(),
                SpdOperator::Matrix(_) => "matrix".into(),
            }
        }
        format!(
            "s={};t={};L1={};L2={};L3={}",
            self.s,
            self.t,
            block(&self.lambda1),
            block(&self.lambda2),
            block(&self.lambda3)
        )
    }
}
