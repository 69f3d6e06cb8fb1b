//! Reduction of `T*G ≅ G × g` at momentum zero: the zero set of
//! `j(g, Y) = Ad_g Y - Y`, its torus representatives modulo the Weyl group,
//! the orbit-type strata and the reduction unitary onto `L²(T)^W`.

use std::f64::consts::PI;

use rand::Rng;
use serde::Serialize;

use crate::coherent::{transformed_gram, GramBasis, PeterWeylVector, SigmaTable};
use crate::density::{weyl_denominator_sq, weyl_order};
use crate::irrep::{labels_up_to, Irrep, IrrepLabel};
use crate::kahler::BasePoint;
use crate::lie::{AlgebraVec, GroupPoint, LieModel, ModelKind};
use crate::quadrature::{radial_rule, torus_rule, QuadratureRule};
use crate::report::CheckReport;
use crate::sampling::{max_abs, par_samples};
use crate::{CMat, Error, Result, C64};

/// Holomorphic Gram, reduced Gram and the worst Weyl-invariance residual.
type GramPair = (Vec<Vec<C64>>, Vec<Vec<C64>>, f64);

/// `‖j(p)‖` below which `p` counts as a zero of the momentum map.
pub const ZERO_SET_TOL: f64 = 1e-9;
/// Singular-value threshold for isotropy dimensions.
pub const RANK_TOL: f64 = 1e-8;
/// Torus coordinates closer than this are tied in the canonical order.
const TIE_TOL: f64 = 1e-9;

/// `j(g, Y) = Ad_g Y - Y`.
pub fn momentum_map(model: &LieModel, p: &BasePoint) -> AlgebraVec {
    &model.adjoint_unchecked(&p.x, &p.y) - &p.y
}

#[derive(Clone, Debug)]
pub struct ZeroSetPoint {
    pub p: BasePoint,
    pub residual: f64,
}

impl ZeroSetPoint {
    pub fn new(model: &LieModel, p: BasePoint) -> Result<Self> {
        let residual = momentum_map(model, &p).norm();
        if residual >= ZERO_SET_TOL {
            return Err(Error::Precondition(format!(
                "‖j(g, Y)‖ = {residual:.3e} is not below the zero-set tolerance {ZERO_SET_TOL:e}"
            )));
        }
        Ok(Self { p, residual })
    }
}

/// `(h g h⁻¹, Ad_h Y) = (t, y0)` with `t ∈ T`, `y0 ∈ t`.
#[derive(Clone, Debug)]
pub struct ReducedRepresentative {
    pub t: GroupPoint,
    /// Torus coordinates of `t`, each in `[0, period)`.
    pub angles: Vec<f64>,
    /// `Y0` in torus coordinates.
    pub y0: Vec<f64>,
    pub conjugator: GroupPoint,
    pub weyl_canonical: bool,
}

impl ReducedRepresentative {
    pub fn y0_vec(&self, model: &LieModel) -> AlgebraVec {
        model.torus_embed(&self.y0)
    }

    /// Distance in `T × t`, angles taken modulo their periods.
    pub fn distance(&self, model: &LieModel, other: &ReducedRepresentative) -> Result<f64> {
        let periods = model.torus_periods()?;
        let mut d2 = 0.0;
        for ((a, b), p) in self.angles.iter().zip(&other.angles).zip(&periods) {
            let d = (a - b).rem_euclid(*p);
            let d = d.min(p - d);
            d2 += d * d;
        }
        for (a, b) in self.y0.iter().zip(&other.y0) {
            d2 += (a - b) * (a - b);
        }
        Ok(d2.sqrt())
    }
}

/// Torus coordinates of a diagonal element, reduced to `[0, period)`.
pub fn torus_angles(model: &LieModel, t: &CMat) -> Result<Vec<f64>> {
    let n = t.nrows();
    let log = CMat::from_fn(n, n, |i, j| {
        if i == j {
            C64::new(0.0, t[(i, i)].arg())
        } else {
            C64::new(0.0, 0.0)
        }
    });
    let coords = model.torus_coords(&model.coords_of(&log));
    let periods = model.torus_periods()?;
    Ok(coords
        .iter()
        .zip(&periods)
        .map(|(c, p)| c.rem_euclid(*p))
        .collect())
}

fn off_diagonal_norm(m: &CMat) -> f64 {
    let mut s = 0.0;
    for i in 0..m.nrows() {
        for j in 0..m.ncols() {
            if i != j {
                s += m[(i, j)].norm_sqr();
            }
        }
    }
    s.sqrt()
}

/// Conjugate a zero of `j` into `T × t`.
///
/// `g` and `Y` commute, so a generic real combination of the hermitian
/// matrices `i(g - g†)/2` and `iY` has a joint eigenbasis with both.
pub fn torus_representative(model: &LieModel, zp: &ZeroSetPoint) -> Result<ReducedRepresentative> {
    let (g, y) = (&zp.p.x, &zp.p.y);
    let h = match model.kind() {
        ModelKind::Torus { .. } => model.identity(),
        ModelKind::Su2 => {
            let gm = g.matrix();
            let skew = (gm - gm.adjoint()) * C64::new(0.0, 0.5);
            let ym = model.to_matrix(y) * C64::new(0.0, 1.0);
            let mut best: Option<(f64, GroupPoint)> = None;
            for lambda in [0.754_877_666_246_692_7, -1.324_717_957_244_746] {
                let hm = &skew + &ym * C64::new(lambda, 0.0);
                let hm = (&hm + hm.adjoint()) * C64::new(0.5, 0.0);
                let u = crate::lie::special_unitary(hm.symmetric_eigen().eigenvectors);
                let cand = GroupPoint::new(u.adjoint());
                let res = off_diagonal_norm(&(cand.matrix() * gm * cand.matrix().adjoint()))
                    .max(model.off_torus_norm(&model.adjoint_unchecked(&cand, y)));
                if res < ZERO_SET_TOL {
                    best = Some((res, cand));
                    break;
                }
                if best.as_ref().is_none_or(|b| res < b.0) {
                    best = Some((res, cand));
                }
            }
            let (res, cand) = best.expect("at least one mixing tried");
            if res >= ZERO_SET_TOL {
                return Err(Error::Numerical(format!(
                    "simultaneous diagonalization left an off-torus residual {res:.3e}"
                )));
            }
            cand
        }
        ModelKind::Custom => {
            return Err(Error::Model(format!(
                "model '{}' has no torus parametrization",
                model.name()
            )))
        }
    };
    let t = GroupPoint::new(h.matrix() * g.matrix() * h.matrix().adjoint());
    let angles = torus_angles(model, t.matrix())?;
    let y0 = model.torus_coords(&model.adjoint_unchecked(&h, y));
    Ok(ReducedRepresentative {
        t: model.torus_point(&angles),
        angles,
        y0,
        conjugator: h,
        weyl_canonical: false,
    })
}

/// Largest first by `y0` (lexicographic, ties within `TIE_TOL`), then
/// smallest by angle.
fn canonical_order(a: &(Vec<f64>, Vec<f64>), b: &(Vec<f64>, Vec<f64>)) -> std::cmp::Ordering {
    use std::cmp::Ordering;
    for (x, y) in a.1.iter().zip(&b.1) {
        if (x - y).abs() > TIE_TOL {
            return y.total_cmp(x);
        }
    }
    for (x, y) in a.0.iter().zip(&b.0) {
        if (x - y).abs() > TIE_TOL {
            return x.total_cmp(y);
        }
    }
    Ordering::Equal
}

/// Unique representative of the Weyl orbit. For SU(2) this is `y0 ≥ 0`,
/// and at `y0 = 0` the torus coordinate in `[0, 2π]` (eigenvalue angle in
/// `[0, π]`).
pub fn weyl_canonicalize(
    model: &LieModel,
    rep: &ReducedRepresentative,
) -> Result<ReducedRepresentative> {
    let periods = model.torus_periods()?;
    let snap = |v: Vec<f64>| -> Vec<f64> {
        v.into_iter()
            .map(|x| if x.abs() < TIE_TOL { 0.0 } else { x })
            .collect()
    };
    let wrap = |v: Vec<f64>| -> Vec<f64> {
        v.into_iter()
            .zip(&periods)
            .map(|(x, p)| {
                let r = x.rem_euclid(*p);
                if p - r < TIE_TOL {
                    0.0
                } else {
                    r
                }
            })
            .collect()
    };
    // ((sort key, angles), conjugator)
    #[allow(clippy::type_complexity)]
    let mut best: Option<((Vec<f64>, Vec<f64>), CMat)> = None;
    for w in model.weyl_group()? {
        let n = match &w.representative {
            Some(n) => n.clone(),
            None if w.is_identity(1e-12) => model.identity().into_matrix(),
            None => return Err(Error::Model("Weyl element without a representative".into())),
        };
        let cand = (wrap(w.act(&rep.angles)), snap(w.act(&rep.y0)));
        let better = match &best {
            None => true,
            Some((b, _)) => canonical_order(&cand, b) == std::cmp::Ordering::Less,
        };
        if better {
            best = Some((cand, n));
        }
    }
    let ((angles, y0), n) = best.expect("Weyl group contains the identity");
    Ok(ReducedRepresentative {
        t: model.torus_point(&angles),
        angles,
        y0,
        conjugator: GroupPoint::new(n * rep.conjugator.matrix()),
        weyl_canonical: true,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct StratumTag {
    pub isotropy_dim: usize,
    pub principal: bool,
    /// Distance in `T × t` to the nearest non-principal point; `None` for
    /// tori, where every point is principal.
    pub distance_to_singular: Option<f64>,
    /// A singular value fell within ten times the rank threshold.
    pub ambiguous: bool,
}

/// Dimension of `ker(Ad_t - I) ∩ ker(ad_{Y0})` by singular values.
pub fn stratum_classify(model: &LieModel, rep: &ReducedRepresentative) -> StratumTag {
    let n = model.dim();
    let ad_t = model.adjoint_matrix(&rep.t) - crate::RMat::identity(n, n);
    let ad_y = model.ad_matrix(&rep.y0_vec(model));
    let stacked = crate::RMat::from_fn(2 * n, n, |i, j| {
        if i < n {
            ad_t[(i, j)]
        } else {
            ad_y[(i - n, j)]
        }
    });
    let sv = stacked.singular_values();
    let rank = sv.iter().filter(|s| **s > RANK_TOL).count();
    let ambiguous = sv.iter().any(|s| *s > RANK_TOL && *s <= 10.0 * RANK_TOL);
    let isotropy_dim = n - rank;
    let roots = model.positive_roots();
    let distance_to_singular = if roots.is_empty() {
        None
    } else {
        Some(
            roots
                .iter()
                .map(|a| {
                    let phase = a.eval(&rep.angles).rem_euclid(2.0 * PI);
                    let dp = phase.min(2.0 * PI - phase);
                    let dy = a.eval(&rep.y0);
                    (dp * dp + dy * dy).sqrt() / a.norm_sq().sqrt()
                })
                .fold(f64::INFINITY, f64::min),
        )
    };
    StratumTag {
        isotropy_dim,
        principal: isotropy_dim == model.rank(),
        distance_to_singular,
        ambiguous,
    }
}

/// Samples of a function on `T` together with the quadrature rule.
#[derive(Clone, Debug)]
pub struct TorusSamples {
    pub rule: QuadratureRule,
    pub values: Vec<C64>,
}

impl TorusSamples {
    pub fn inner(&self, other: &TorusSamples) -> C64 {
        self.rule
            .weights
            .iter()
            .zip(self.values.iter().zip(&other.values))
            .map(|(w, (a, b))| a * b.conj() * *w)
            .sum()
    }
}

/// Largest deviation of a Peter–Weyl vector from a combination of
/// characters.
pub fn class_defect(f: &PeterWeylVector) -> f64 {
    f.blocks
        .values()
        .map(|c| {
            let d = c.nrows();
            let mean = c.trace() / C64::new(d as f64, 0.0);
            (c - CMat::identity(d, d) * mean)
                .iter()
                .map(|z| z.norm())
                .fold(0.0, f64::max)
        })
        .fold(0.0, f64::max)
}

/// Torus rule exact for `|δ|² f ḡ` with `f, g` of height at most `cutoff`.
pub fn reduction_rule(model: &LieModel, cutoff: usize) -> Result<QuadratureRule> {
    Ok(torus_rule(&model.torus_periods()?, 4 * cutoff + 4))
}

/// `f ↦ |W|^{-1/2} |δ| f|_T` on the nodes of `rule`.
pub fn reduction_unitary(
    model: &LieModel,
    table: &SigmaTable,
    f: &PeterWeylVector,
    rule: &QuadratureRule,
) -> Result<TorusSamples> {
    let defect = class_defect(f);
    if defect > 1e-12 {
        return Err(Error::Precondition(format!(
            "not a class function (defect {defect:.3e})"
        )));
    }
    let c = (weyl_order(model)? as f64).powf(-0.5);
    let values = rule
        .nodes
        .iter()
        .map(|y| {
            let d = weyl_denominator_sq(model, y).sqrt();
            Ok(f.evaluate(table, model.torus_point(y).matrix())? * (c * d))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(TorusSamples {
        rule: rule.clone(),
        values,
    })
}

fn gram_of(samples: &[TorusSamples]) -> Vec<Vec<C64>> {
    samples
        .iter()
        .map(|a| samples.iter().map(|b| a.inner(b)).collect())
        .collect()
}

fn identity_deviation(g: &[Vec<C64>]) -> f64 {
    let mut e: f64 = 0.0;
    for (a, row) in g.iter().enumerate() {
        for (b, x) in row.iter().enumerate() {
            e = e.max((x - C64::new(if a == b { 1.0 } else { 0.0 }, 0.0)).norm());
        }
    }
    e
}

fn real_part(g: &[Vec<C64>]) -> Vec<Vec<f64>> {
    g.iter().map(|r| r.iter().map(|x| x.re).collect()).collect()
}

/// Numerical rank of the leading `k × k` block of each Gram, `k = 1..`.
fn leading_ranks(g: &[Vec<C64>]) -> Vec<usize> {
    (1..=g.len())
        .map(|k| {
            let m = CMat::from_fn(k, k, |a, b| g[a][b]);
            let m = (&m + m.adjoint()) * C64::new(0.5, 0.0);
            m.symmetric_eigen()
                .eigenvalues
                .iter()
                .filter(|e| **e > 1e-6)
                .count()
        })
        .collect()
}

/// `j(h g h⁻¹, Ad_h Y) = Ad_h j(g, Y)`.
pub fn momentum_equivariance_certificate(
    model: &LieModel,
    samples: usize,
    seed: u64,
) -> Result<CheckReport> {
    let res = par_samples(seed, 51, samples, |rng| -> Result<f64> {
        let h = model.random_group_point(rng)?;
        let g = model.random_group_point(rng)?;
        let y = model.random_algebra(rng, 2.0);
        let hgh = GroupPoint::new(h.matrix() * g.matrix() * h.matrix().adjoint());
        let lhs = momentum_map(model, &BasePoint::new(hgh, model.adjoint_unchecked(&h, &y)));
        let rhs = model.adjoint_unchecked(&h, &momentum_map(model, &BasePoint::new(g, y)));
        Ok((&lhs - &rhs).norm())
    });
    let err = max_abs(res.into_iter().map(|r| r.unwrap_or(f64::INFINITY)));
    Ok(CheckReport::new(
        "reduction.momentum_equivariance",
        "j(g, Y) = Ad_g Y - Y is Ad-equivariant",
        1e-10,
        err,
    )
    .with("samples", samples as u64))
}

/// A canonical representative with about one in four samples on `y0 = 0`.
fn random_canonical<R: Rng + ?Sized>(
    model: &LieModel,
    rng: &mut R,
) -> Result<ReducedRepresentative> {
    let periods = model.torus_periods()?;
    let angles: Vec<f64> = periods.iter().map(|p| rng.random_range(0.0..*p)).collect();
    let y0: Vec<f64> = if rng.random_bool(0.25) {
        vec![0.0; model.rank()]
    } else {
        (0..model.rank())
            .map(|_| rng.random_range(-3.0..3.0))
            .collect()
    };
    let rep = ReducedRepresentative {
        t: model.torus_point(&angles),
        angles,
        y0,
        conjugator: model.identity(),
        weyl_canonical: false,
    };
    weyl_canonicalize(model, &rep)
}

/// Canonical representative, conjugated by a random `h`, recovered.
pub fn round_trip_certificate(model: &LieModel, samples: usize, seed: u64) -> Result<CheckReport> {
    let res = par_samples(seed, 52, samples, |rng| -> Result<(f64, f64)> {
        let rep = random_canonical(model, rng)?;
        let h = model.random_group_point(rng)?;
        let hinv = GroupPoint::new(h.matrix().adjoint());
        let g = GroupPoint::new(hinv.matrix() * rep.t.matrix() * h.matrix());
        let y = model.adjoint_unchecked(&hinv, &rep.y0_vec(model));
        let zp = ZeroSetPoint::new(model, BasePoint::new(g.clone(), y.clone()))?;
        let back = weyl_canonicalize(model, &torus_representative(model, &zp)?)?;
        let k = back.conjugator.matrix();
        let conj = (k * g.matrix() * k.adjoint() - back.t.matrix()).norm()
            + (&model.adjoint_unchecked(&back.conjugator, &y) - &back.y0_vec(model)).norm();
        Ok((back.distance(model, &rep)?, conj))
    });
    let mut err: f64 = 0.0;
    let mut conj: f64 = 0.0;
    for r in res {
        let (a, b) = r?;
        err = err.max(a);
        conj = conj.max(b);
    }
    Ok(CheckReport::combine(
        "reduction.round_trip",
        "T x t / W homeomorphic to j^-1(0) / Ad G",
        vec![
            CheckReport::new(
                "reduction.round_trip.representative",
                "canonical representative recovered",
                1e-8,
                err,
            ),
            CheckReport::new(
                "reduction.round_trip.conjugator",
                "(h g h^-1, Ad_h Y) = (t, Y0)",
                1e-9,
                conj,
            ),
        ],
    )
    .with("samples", samples as u64))
}

/// Every Weyl translate canonicalizes to the same point, and
/// canonicalization is idempotent.
pub fn weyl_orbit_certificate(model: &LieModel, samples: usize, seed: u64) -> Result<CheckReport> {
    let weyl = model.weyl_group()?;
    let res = par_samples(seed, 53, samples, |rng| -> Result<f64> {
        let rep = random_canonical(model, rng)?;
        let mut worst = weyl_canonicalize(model, &rep)?.distance(model, &rep)?;
        for w in &weyl {
            let moved = ReducedRepresentative {
                t: model.torus_point(&w.act(&rep.angles)),
                angles: w.act(&rep.angles),
                y0: w.act(&rep.y0),
                conjugator: model.identity(),
                weyl_canonical: false,
            };
            worst = worst.max(weyl_canonicalize(model, &moved)?.distance(model, &rep)?);
        }
        Ok(worst)
    });
    let err = max_abs(res.into_iter().map(|r| r.unwrap_or(f64::INFINITY)));
    Ok(CheckReport::new(
        "reduction.weyl_orbit",
        "points of T x t in the same W orbit",
        1e-12,
        err,
    )
    .with("weyl_order", weyl.len() as u64))
}

/// Count non-principal points on nested `T × t` grids; a codimension-2
/// singular set gives counts independent of the refinement.
pub fn stratification_certificate(model: &LieModel) -> Result<CheckReport> {
    let periods = model.torus_periods()?;
    let r = model.rank();
    let mut counts = Vec::new();
    let mut ambiguous = 0u64;
    let sizes: &[usize] = if r == 1 { &[9, 17, 33, 65] } else { &[5, 9] };
    for &n in sizes {
        // Angles and y on grids containing the special values.
        let angle_axis: Vec<Vec<f64>> = periods
            .iter()
            .map(|p| {
                (0..2 * (n - 1))
                    .map(|k| p * k as f64 / (2 * (n - 1)) as f64)
                    .collect()
            })
            .collect();
        let y_axis: Vec<f64> = (0..n)
            .map(|k| -1.0 + 2.0 * k as f64 / (n - 1) as f64)
            .collect();
        let mut points: Vec<(Vec<f64>, Vec<f64>)> = vec![(Vec::new(), Vec::new())];
        for axis in &angle_axis {
            points = points
                .into_iter()
                .flat_map(|(a, y)| {
                    axis.iter()
                        .map(move |v| (a.iter().copied().chain([*v]).collect(), y.clone()))
                })
                .collect();
        }
        for _ in 0..r {
            points = points
                .into_iter()
                .flat_map(|(a, y)| {
                    y_axis
                        .iter()
                        .map(move |v| (a.clone(), y.iter().copied().chain([*v]).collect()))
                })
                .collect();
        }
        let mut singular = 0u64;
        for (angles, y0) in points {
            let rep = ReducedRepresentative {
                t: model.torus_point(&angles),
                angles,
                y0,
                conjugator: model.identity(),
                weyl_canonical: false,
            };
            let tag = stratum_classify(model, &rep);
            if tag.ambiguous {
                ambiguous += 1;
            }
            if !tag.principal {
                singular += 1;
            }
        }
        counts.push(singular);
    }
    let stable = counts.windows(2).all(|w| w[0] == w[1]);
    Ok(CheckReport::condition(
        "reduction.stratification",
        "singular strata have codimension at least 2",
        stable && ambiguous == 0,
    )
    .with("singular_counts", counts)
    .with("ambiguous", ambiguous))
}

/// `χ_j ↦ |W|^{-1/2}|δ|χ_j` is isometric for `j ≤ max_label`.
pub fn reduction_isometry_certificate(model: &LieModel, max_label: usize) -> Result<CheckReport> {
    let table = SigmaTable::build(model, max_label)?;
    let rule = reduction_rule(model, max_label)?;
    let labels = labels_up_to(model, max_label)?;
    let images = labels
        .iter()
        .map(|l| {
            reduction_unitary(
                model,
                &table,
                &PeterWeylVector::character(table.irrep(l)?, max_label)?,
                &rule,
            )
        })
        .collect::<Result<Vec<_>>>()?;
    let gram = gram_of(&images);
    Ok(CheckReport::new(
        "reduction.isometry",
        "f -> c |delta| f|_T, Weyl integration formula",
        1e-6,
        identity_deviation(&gram),
    )
    .with(
        "labels",
        labels.iter().map(|l| l.to_string()).collect::<Vec<_>>(),
    )
    .with("nodes", rule.len() as u64))
}

/// Largest `|F(w·θ) - F(θ)|` over nodes and Weyl elements, where `F` is
/// evaluated through `eval`.
fn weyl_residual<F: Fn(&[f64]) -> Result<C64>>(
    model: &LieModel,
    rule: &QuadratureRule,
    eval: F,
) -> Result<f64> {
    let mut worst: f64 = 0.0;
    for w in model.weyl_group()? {
        for y in &rule.nodes {
            worst = worst.max((eval(&w.act(y))? - eval(y)?).norm());
        }
    }
    Ok(worst)
}

/// Reduction after quantization, `(A)`, against quantization after
/// reduction, `(B)`, as orthonormal systems in `L²(T)^W`.
#[derive(Clone, Debug, Serialize)]
pub struct QrSides {
    /// HL² Gram of the holomorphic characters `C_φ χ_j`.
    pub a_holomorphic: Vec<Vec<f64>>,
    /// `L²(T)` Gram of their reductions.
    pub a_reduced: Vec<Vec<f64>>,
    /// Gram of the symmetrized torus characters over `(T × t)/W`.
    pub b_holomorphic: Vec<Vec<f64>>,
    /// `L²(T)` Gram of their torus transforms.
    pub b_reduced: Vec<Vec<f64>>,
    pub dims_a: Vec<usize>,
    pub dims_b: Vec<usize>,
    pub weyl_residual_a: f64,
    pub weyl_residual_b: f64,
    pub deviation_a: f64,
    pub deviation_b: f64,
}

/// Side `(A)`: the HL² Gram `G` of `C_φ χ_j` carries the coefficients of
/// `C_φ⁻¹ C_φ χ_j` in the character basis, which the reduction unitary maps
/// to `L²(T)`; the reduced Gram is `G R G†` with `R` the Gram of the
/// reduced characters.
fn side_a(model: &LieModel, cutoff: usize) -> Result<GramPair> {
    let table = SigmaTable::build(model, cutoff)?;
    let labels = labels_up_to(model, cutoff)?;
    let hl = transformed_gram(model, &table, cutoff, cutoff, GramBasis::Characters)?.gram;
    let rule = reduction_rule(model, cutoff)?;
    let chars = labels
        .iter()
        .map(|l| PeterWeylVector::character(table.irrep(l)?, cutoff))
        .collect::<Result<Vec<_>>>()?;
    let images = chars
        .iter()
        .map(|f| reduction_unitary(model, &table, f, &rule))
        .collect::<Result<Vec<_>>>()?;
    let k = labels.len();
    let g = CMat::from_fn(k, k, |a, b| hl[a][b]);
    let r = CMat::from_fn(k, k, |a, b| images[a].inner(&images[b]));
    let reduced = &g * r * g.adjoint();
    let reduced: Vec<Vec<C64>> = (0..k)
        .map(|a| (0..k).map(|b| reduced[(a, b)]).collect())
        .collect();
    let c = (weyl_order(model)? as f64).powf(-0.5);
    let mut worst: f64 = 0.0;
    for f in &chars {
        worst = worst.max(weyl_residual(model, &rule, |y| {
            Ok(f.evaluate(&table, model.torus_point(y).matrix())?
                * (c * weyl_denominator_sq(model, y).sqrt()))
        })?);
    }
    Ok((hl, reduced, worst))
}

/// Torus labels `k ≥ 0` (one per Weyl orbit) matching the SU(2) labels up
/// to `cutoff`: `k = 2j`.
fn side_b_su2(model: &LieModel, cutoff: usize) -> Result<GramPair> {
    let torus = model.maximal_torus()?;
    let kmax = 2 * cutoff;
    let table = SigmaTable::build(&torus, kmax)?;
    let w = weyl_order(model)? as f64;
    let periods = torus.torus_periods()?;
    let angle_rule = torus_rule(&periods, 2 * kmax + 2);
    let irreps: Vec<(Irrep, Irrep, f64)> = (0..=kmax as i64)
        .map(|k| {
            let p = Irrep::new(&torus, IrrepLabel::Torus(vec![k]))?;
            let m = Irrep::new(&torus, IrrepLabel::Torus(vec![-k]))?;
            Ok((p, m, table.get(&IrrepLabel::Torus(vec![k]))?))
        })
        .collect::<Result<Vec<_>>>()?;
    // Symmetrized, normalized holomorphic torus characters.
    let value = |idx: usize, t: &CMat| -> C64 {
        let (p, m, s) = &irreps[idx];
        let v = if idx == 0 {
            p.character(t)
        } else {
            (p.character(t) + m.character(t)) / C64::new(2f64.sqrt(), 0.0)
        };
        v / C64::new(s.sqrt(), 0.0)
    };
    let n = irreps.len();
    let growth = 2.0 * kmax as f64 * 0.5 * 2.0;
    let mut prev: Option<Vec<Vec<C64>>> = None;
    let mut hol = Vec::new();
    for level in [32usize, 64, 128, 256] {
        let r_rule = radial_rule(level, growth);
        let mut gram = vec![vec![C64::new(0.0, 0.0); n]; n];
        for (ri, rw) in r_rule.nodes.iter().zip(&r_rule.weights) {
            for (ai, aw) in angle_rule.nodes.iter().zip(&angle_rule.weights) {
                let t = torus
                    .polar(&torus.torus_point(ai), &AlgebraVec::new(ri.clone()))
                    .into_matrix();
                let vals: Vec<C64> = (0..n).map(|i| value(i, &t)).collect();
                for a in 0..n {
                    for b in 0..n {
                        gram[a][b] += vals[a] * vals[b].conj() * (w * rw * aw);
                    }
                }
            }
        }
        let done = prev.as_ref().is_some_and(|p| {
            p.iter()
                .zip(&gram)
                .flat_map(|(x, y)| x.iter().zip(y).map(|(u, v)| (u - v).norm()))
                .fold(0.0, f64::max)
                < 1e-12
        });
        prev = Some(gram.clone());
        hol = gram;
        if done {
            break;
        }
    }
    // The torus transform sends σ_k^{-1/2} z^k to the character e^{ik·}.
    let rule = reduction_rule(model, cutoff)?;
    let real_value = |idx: usize, y: &[f64]| -> C64 {
        let t = torus.torus_point(y).into_matrix();
        let (p, m, _) = &irreps[idx];
        if idx == 0 {
            p.character(&t)
        } else {
            (p.character(&t) + m.character(&t)) / C64::new(2f64.sqrt(), 0.0)
        }
    };
    let samples: Vec<TorusSamples> = (0..n)
        .map(|i| TorusSamples {
            rule: rule.clone(),
            values: rule.nodes.iter().map(|y| real_value(i, y)).collect(),
        })
        .collect();
    let reduced = gram_of(&samples);
    let mut worst: f64 = 0.0;
    for i in 0..n {
        worst = worst.max(weyl_residual(model, &rule, |y| Ok(real_value(i, y)))?);
    }
    Ok((hol, reduced, worst))
}

pub fn qr_sides(model: &LieModel, cutoff: usize) -> Result<QrSides> {
    let (a_hol, a_red, wa) = side_a(model, cutoff)?;
    let (b_hol, b_red, wb) = match model.kind() {
        // For a torus the quotient is T*T itself and both routes are one
        // construction.
        ModelKind::Torus { .. } => (a_hol.clone(), a_red.clone(), wa),
        ModelKind::Su2 => side_b_su2(model, cutoff)?,
        ModelKind::Custom => {
            return Err(Error::Model(
                "reduction needs a torus parametrization".into(),
            ))
        }
    };
    Ok(QrSides {
        dims_a: leading_ranks(&a_red),
        dims_b: leading_ranks(&b_red),
        deviation_a: identity_deviation(&a_hol).max(identity_deviation(&a_red)),
        deviation_b: identity_deviation(&b_hol).max(identity_deviation(&b_red)),
        a_holomorphic: real_part(&a_hol),
        a_reduced: real_part(&a_red),
        b_holomorphic: real_part(&b_hol),
        b_reduced: real_part(&b_red),
        weyl_residual_a: wa,
        weyl_residual_b: wb,
    })
}

/// Both sides orthonormal, equal dimensions at every cutoff, both
/// Weyl-invariant; for tori the two Grams coincide exactly.
pub fn qr_commutes_certificate(model: &LieModel, cutoff: usize) -> Result<CheckReport> {
    let s = qr_sides(model, cutoff)?;
    let tol = if model.is_abelian() { 1e-6 } else { 1e-4 };
    let mut parts = vec![
        CheckReport::new(
            "reduction.qr.side_a",
            "reduction after quantization orthonormal",
            tol,
            s.deviation_a,
        ),
        CheckReport::new(
            "reduction.qr.side_b",
            "quantization after reduction orthonormal",
            tol,
            s.deviation_b,
        ),
        CheckReport::condition(
            "reduction.qr.dimensions",
            "equal dimensions per cutoff",
            s.dims_a == s.dims_b,
        ),
        CheckReport::new(
            "reduction.qr.weyl_invariance",
            "both systems lie in L^2(T)^W",
            1e-8,
            s.weyl_residual_a.max(s.weyl_residual_b),
        ),
    ];
    if model.is_abelian() {
        let diff = s
            .a_reduced
            .iter()
            .zip(&s.b_reduced)
            .chain(s.a_holomorphic.iter().zip(&s.b_holomorphic))
            .flat_map(|(x, y)| x.iter().zip(y).map(|(u, v)| (u - v).abs()))
            .fold(0.0, f64::max);
        parts.push(CheckReport::new(
            "reduction.qr.coincidence",
            "torus: both routes coincide",
            0.0,
            diff,
        ));
    }
    Ok(CheckReport::combine(
        "reduction.qr_commutes",
        "quantization commutes with reduction: both isomorphic to L^2(T)^W",
        parts,
    )
    .with("cutoff", cutoff as u64)
    .with_json("sides", &s)
    .with_heatmap("side A reduced Gram", &s.a_reduced)
    .with_heatmap("side B reduced Gram", &s.b_reduced))
}

pub fn reduction_certificates(
    model: &LieModel,
    cutoff: usize,
    seed: u64,
) -> Result<Vec<CheckReport>> {
    let iso_label = if model.is_abelian() {
        cutoff
    } else {
        cutoff.max(3)
    };
    Ok(vec![
        momentum_equivariance_certificate(model, 10_000, seed)?,
        round_trip_certificate(model, 1000, seed)?,
        weyl_orbit_certificate(model, 200, seed)?,
        stratification_certificate(model)?,
        reduction_isometry_certificate(model, iso_label)?,
        qr_commutes_certificate(model, cutoff)?,
    ])
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn momentum_examples() {
        let m = LieModel::su2();
        let g = m.exp(&AlgebraVec::new(vec![0.0, 0.0, PI / 2.0]));
        let j = momentum_map(&m, &BasePoint::new(g, AlgebraVec::new(vec![1.0, 0.0, 0.0])));
        assert!((&j - &AlgebraVec::new(vec![-1.0, 1.0, 0.0])).norm() < 1e-12);
        assert!((j.norm() - 2f64.sqrt()).abs() < 1e-12);
        let y = AlgebraVec::new(vec![0.3, -0.2, 0.5]);
        assert!(momentum_map(&m, &BasePoint::at_identity(&m, y)).norm() < 1e-15);
    }

    #[test]
    fn zero_set_precondition() {
        let m = LieModel::su2();
        let g = m.exp(&AlgebraVec::new(vec![0.0, 0.0, 1.0]));
        let p = BasePoint::new(g, AlgebraVec::new(vec![1.0, 0.0, 0.0]));
        assert!(matches!(
            ZeroSetPoint::new(&m, p),
            Err(Error::Precondition(_))
        ));
    }

    #[test]
    fn flip_and_tie_break() {
        let m = LieModel::su2();
        let rep = ReducedRepresentative {
            t: m.torus_point(&[1.0]),
            angles: vec![1.0],
            y0: vec![-1.0],
            conjugator: m.identity(),
            weyl_canonical: false,
        };
        let c = weyl_canonicalize(&m, &rep).unwrap();
        assert!((c.y0[0] - 1.0).abs() < 1e-15);
        assert!((c.angles[0] - (4.0 * PI - 1.0)).abs() < 1e-12);
        // Conjugator maps the original point to the canonical one.
        let k = c.conjugator.matrix();
        assert!((k * rep.t.matrix() * k.adjoint() - c.t.matrix()).norm() < 1e-12);
        let zero = ReducedRepresentative {
            angles: vec![3.0 * PI],
            t: m.torus_point(&[3.0 * PI]),
            y0: vec![0.0],
            ..rep
        };
        let c = weyl_canonicalize(&m, &zero).unwrap();
        assert!((c.angles[0] - PI).abs() < 1e-12);
        let again = weyl_canonicalize(&m, &c).unwrap();
        assert_eq!(again.distance(&m, &c).unwrap(), 0.0);
    }

    #[test]
    fn strata() {
        let m = LieModel::su2();
        let rep = |a: f64, y: f64| ReducedRepresentative {
            t: m.torus_point(&[a]),
            angles: vec![a],
            y0: vec![y],
            conjugator: m.identity(),
            weyl_canonical: true,
        };
        let generic = stratum_classify(&m, &rep(1.0, 1.0));
        assert!(generic.principal && generic.isotropy_dim == 1);
        for a in [0.0, 2.0 * PI] {
            let s = stratum_classify(&m, &rep(a, 0.0));
            assert_eq!(s.isotropy_dim, 3);
            assert!(!s.principal);
            assert_eq!(s.distance_to_singular, Some(0.0));
        }
        let t = LieModel::t2();
        let r = ReducedRepresentative {
            t: t.torus_point(&[0.0, 0.0]),
            angles: vec![0.0, 0.0],
            y0: vec![0.0, 0.0],
            conjugator: t.identity(),
            weyl_canonical: true,
        };
        let s = stratum_classify(&t, &r);
        assert!(s.principal && s.distance_to_singular.is_none());
    }

    #[test]
    fn non_class_input_rejected() {
        let m = LieModel::su2();
        let table = SigmaTable::build(&m, 1).unwrap();
        let f = PeterWeylVector::basis(
            table.irrep(&IrrepLabel::Su2 { twice_j: 1 }).unwrap(),
            0,
            1,
            1,
        )
        .unwrap();
        let rule = reduction_rule(&m, 1).unwrap();
        assert!(matches!(
            reduction_unitary(&m, &table, &f, &rule),
            Err(Error::Precondition(_))
        ));
    }

    #[test]
    fn torus_reduction_is_identity() {
        let m = LieModel::u1();
        let table = SigmaTable::build(&m, 2).unwrap();
        let f = PeterWeylVector::character(table.irrep(&IrrepLabel::Torus(vec![2])).unwrap(), 2)
            .unwrap();
        let rule = reduction_rule(&m, 2).unwrap();
        let s = reduction_unitary(&m, &table, &f, &rule).unwrap();
        for (y, v) in rule.nodes.iter().zip(&s.values) {
            let direct = f.evaluate(&table, m.torus_point(y).matrix()).unwrap();
            assert!((v - direct).norm() < 1e-14);
        }
    }
}
