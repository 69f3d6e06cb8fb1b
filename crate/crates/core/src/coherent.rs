//! Truncated Peter–Weyl model of the coherent-state transform
//! `(C_φ f)(t) = ∫_G f(x) φ(x⁻¹t) dx`.
//!
//! Functions are stored as coefficients in the orthonormal basis
//! `√d π_ab` of `L²(G)` (probability Haar). With that convention `C_φ`
//! multiplies the block of `π` by `σ(π̄)^{-1/2}` and replaces `π` by its
//! holomorphic extension.

use std::collections::BTreeMap;
use std::f64::consts::PI;

use rand::Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::Serialize;

use crate::density::{eta, group_rule_nodes};
use crate::irrep::{labels_up_to, Irrep, IrrepLabel};
use crate::lie::{sinhc, AlgebraVec, LieModel, ModelKind, WeylElement};
use crate::quadrature::{gaussian_rule, radial_rule, Converged, QuadratureRule};
use crate::report::CheckReport;
use crate::sampling::{max_abs, par_samples, sample_rng};
use crate::{CMat, Error, Result, C64};

/// Default cutoff per built-in model.
pub fn default_cutoff(model: &LieModel) -> usize {
    match model.kind() {
        ModelKind::Su2 => 2,
        ModelKind::Torus { scales } if scales.len() == 1 => 8,
        _ => 3,
    }
}

/// `σ(π)` with its quadrature provenance.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SigmaValue {
    pub value: f64,
    /// Change under the last node doubling, relative to the value.
    pub error_estimate: f64,
    pub rule: String,
    pub nodes: usize,
}

/// `σ(π) = (1/d) ∫_g ‖π(e^{iY})⁻¹‖²_HS e^{-2π|Y|²} dY`.
///
/// SU(2) uses the radial reduction; tori use a product Gauss–Hermite rule.
pub fn sigma(model: &LieModel, irrep: &Irrep) -> Result<SigmaValue> {
    let d = irrep.dim as f64;
    match model.kind() {
        ModelKind::Su2 => {
            let unit = model.torus_embed(&[1.0]);
            let m = irrep.weights(&unit);
            let growth = 2.0 * m.iter().fold(0.0f64, |a, b| a.max(b.abs()));
            let f = |r: f64| {
                4.0 * PI * r * r * m.iter().map(|mi| (2.0 * mi * r).exp()).sum::<f64>() / d
            };
            let c = converge_relative(
                |lvl| radial_rule(lvl, growth).integrate(|x| f(x[0])),
                32,
                2048,
            );
            Ok(SigmaValue {
                value: c.value,
                error_estimate: c.delta / c.value,
                rule: "Gauss-Legendre radial".into(),
                nodes: c.level,
            })
        }
        ModelKind::Torus { scales } => {
            // The integrand factorizes over orthonormal torus coordinates.
            let IrrepLabel::Torus(n) = &irrep.label else {
                return Err(Error::Model(format!(
                    "{} is not a torus label",
                    irrep.label
                )));
            };
            let mut value = 1.0;
            let mut err: f64 = 0.0;
            let mut nodes = 1;
            for (k, s) in n.iter().zip(scales) {
                let m = *k as f64 * s;
                let c = converge_relative(
                    |lvl| gaussian_rule(1, lvl).integrate(|y| (2.0 * m * y[0]).exp()),
                    16,
                    1024,
                );
                value *= c.value;
                err += c.delta / c.value;
                nodes *= c.level;
            }
            Ok(SigmaValue {
                value: value / d,
                error_estimate: err,
                rule: "Gauss-Hermite per torus coordinate".into(),
                nodes,
            })
        }
        ModelKind::Custom => Err(Error::Model(format!(
            "model '{}' has no irreducible representations",
            model.name()
        ))),
    }
}

/// Double the level until the relative change is below 1e-14.
fn converge_relative<F: FnMut(usize) -> f64>(mut f: F, start: usize, max: usize) -> Converged {
    let mut c = Converged {
        value: f(start),
        level: start,
        delta: f64::INFINITY,
    };
    while c.level * 2 <= max {
        let next = f(c.level * 2);
        let delta = (next - c.value).abs();
        c = Converged {
            value: next,
            level: c.level * 2,
            delta,
        };
        if delta <= 1e-14 * next.abs() {
            break;
        }
    }
    c
}

/// `σ(π)` by a product Gauss–Hermite rule over all of `g`.
pub fn sigma_gauss_hermite(model: &LieModel, irrep: &Irrep, level: usize) -> f64 {
    let rule = gaussian_rule(model.dim(), level);
    let d = irrep.dim as f64;
    let terms: Vec<f64> = rule
        .nodes
        .par_iter()
        .zip(&rule.weights)
        .map(|(y, w)| w * irrep.log_hs_inverse_sq(&AlgebraVec::new(y.clone())).exp())
        .collect();
    terms.iter().sum::<f64>() / d
}

/// Closed forms: `∏_k e^{(n_k s_k)²/2π}/√2` on tori, and
/// `(1/d) Σ_m e^{m²/2π}(1/2 + m²/2π)/√2` on SU(2).
pub fn sigma_closed_form(model: &LieModel, label: &IrrepLabel) -> Result<f64> {
    match (model.kind(), label) {
        (ModelKind::Torus { scales }, IrrepLabel::Torus(n)) if n.len() == scales.len() => Ok(n
            .iter()
            .zip(scales)
            .map(|(k, s)| {
                let m = *k as f64 * s;
                (m * m / (2.0 * PI)).exp() / 2f64.sqrt()
            })
            .product()),
        (ModelKind::Su2, IrrepLabel::Su2 { twice_j }) => {
            let tj = *twice_j as i64;
            let sum: f64 = (0..=tj)
                .map(|k| {
                    let m = (2 * k - tj) as f64 / 2.0;
                    let q = m * m / (2.0 * PI);
                    q.exp() * (0.5 + q) / 2f64.sqrt()
                })
                .sum();
            Ok(sum / (tj + 1) as f64)
        }
        _ => Err(Error::Model(format!(
            "no closed form for {label} on '{}'",
            model.name()
        ))),
    }
}

/// `σ` for every label up to a cutoff.
#[derive(Clone, Debug, Serialize)]
pub struct SigmaTable {
    pub cutoff: usize,
    pub entries: BTreeMap<IrrepLabel, SigmaValue>,
    #[serde(skip)]
    irreps: BTreeMap<IrrepLabel, Irrep>,
}

impl SigmaTable {
    pub fn build(model: &LieModel, cutoff: usize) -> Result<Self> {
        let mut entries = BTreeMap::new();
        let mut irreps = BTreeMap::new();
        for label in labels_up_to(model, cutoff)? {
            let irrep = Irrep::new(model, label.clone())?;
            let s = sigma(model, &irrep)?;
            if !(s.value.is_finite() && s.value > 0.0) {
                return Err(Error::Numerical(format!(
                    "σ({label}) = {} is not positive and finite",
                    s.value
                )));
            }
            entries.insert(label.clone(), s);
            irreps.insert(label, irrep);
        }
        Ok(Self {
            cutoff,
            entries,
            irreps,
        })
    }

    pub fn get(&self, label: &IrrepLabel) -> Result<f64> {
        self.entries.get(label).map(|s| s.value).ok_or_else(|| {
            Error::Cutoff(format!(
                "σ({label}) is outside the table cutoff {}",
                self.cutoff
            ))
        })
    }

    pub fn irrep(&self, label: &IrrepLabel) -> Result<&Irrep> {
        self.irreps.get(label).ok_or_else(|| {
            Error::Cutoff(format!(
                "{label} is outside the table cutoff {}",
                self.cutoff
            ))
        })
    }

    pub fn labels(&self) -> impl Iterator<Item = &IrrepLabel> {
        self.entries.keys()
    }

    /// Largest relative quadrature error estimate.
    pub fn error_estimate(&self) -> f64 {
        self.entries
            .values()
            .map(|s| s.error_estimate)
            .fold(0.0, f64::max)
    }

    /// `{label: σ}` keyed by the printed label.
    pub fn to_json(&self) -> serde_json::Value {
        let map: BTreeMap<String, f64> = self
            .entries
            .iter()
            .map(|(l, s)| (l.to_string(), s.value))
            .collect();
        serde_json::to_value(map).unwrap_or(serde_json::Value::Null)
    }
}

fn invert(t: &CMat) -> Result<CMat> {
    t.clone()
        .try_inverse()
        .ok_or_else(|| Error::Numerical("singular group point".into()))
}

/// `φ(t) = Σ_π (d_π / √σ(π)) tr π(t⁻¹)`, truncated at the table cutoff.
pub fn phi_kernel(table: &SigmaTable, t: &CMat) -> Result<C64> {
    let t_inv = invert(t)?;
    Ok(phi_at_inverse(table, &t_inv))
}

fn phi_at_inverse(table: &SigmaTable, t_inv: &CMat) -> C64 {
    table
        .irreps
        .iter()
        .map(|(label, irrep)| {
            irrep.character(t_inv) * (irrep.dim as f64 / table.entries[label].value.sqrt())
        })
        .sum()
}

/// `f = Σ_π Σ_ab c^π_ab √d π_ab`.
#[derive(Clone, Debug, PartialEq)]
pub struct PeterWeylVector {
    pub cutoff: usize,
    pub blocks: BTreeMap<IrrepLabel, CMat>,
}

impl PeterWeylVector {
    pub fn zero(cutoff: usize) -> Self {
        Self {
            cutoff,
            blocks: BTreeMap::new(),
        }
    }

    /// The character `χ_π = Σ_a π_aa`.
    pub fn character(irrep: &Irrep, cutoff: usize) -> Result<Self> {
        if irrep.label.height() > cutoff as f64 {
            return Err(Error::Cutoff(format!(
                "{} exceeds cutoff {cutoff}",
                irrep.label
            )));
        }
        let d = irrep.dim;
        let mut v = Self::zero(cutoff);
        v.blocks.insert(
            irrep.label.clone(),
            CMat::identity(d, d) / C64::new((d as f64).sqrt(), 0.0),
        );
        Ok(v)
    }

    /// The basis function `√d π_ab`.
    pub fn basis(irrep: &Irrep, a: usize, b: usize, cutoff: usize) -> Result<Self> {
        if irrep.label.height() > cutoff as f64 {
            return Err(Error::Cutoff(format!(
                "{} exceeds cutoff {cutoff}",
                irrep.label
            )));
        }
        let mut m = CMat::zeros(irrep.dim, irrep.dim);
        m[(a, b)] = C64::new(1.0, 0.0);
        let mut v = Self::zero(cutoff);
        v.blocks.insert(irrep.label.clone(), m);
        Ok(v)
    }

    /// Gaussian coefficients on every block, normalized to unit norm.
    pub fn random<R: Rng + ?Sized>(table: &SigmaTable, rng: &mut R) -> Self {
        let mut v = Self::zero(table.cutoff);
        for (label, irrep) in &table.irreps {
            let d = irrep.dim;
            let m = CMat::from_fn(d, d, |_, _| {
                C64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))
            });
            v.blocks.insert(label.clone(), m);
        }
        let n = v.norm_sq().sqrt();
        v.scale(C64::new(1.0 / n, 0.0))
    }

    pub fn scale(mut self, s: C64) -> Self {
        for m in self.blocks.values_mut() {
            *m *= s;
        }
        self
    }

    /// `Σ |c|²`, the `L²(G)` norm squared.
    pub fn norm_sq(&self) -> f64 {
        self.blocks.values().map(|m| m.norm_squared()).sum()
    }

    pub fn max_diff(&self, other: &PeterWeylVector) -> f64 {
        let mut keys: Vec<&IrrepLabel> = self.blocks.keys().chain(other.blocks.keys()).collect();
        keys.sort();
        keys.dedup();
        keys.into_iter()
            .map(|k| match (self.blocks.get(k), other.blocks.get(k)) {
                (Some(a), Some(b)) => (a - b).iter().map(|z| z.norm()).fold(0.0, f64::max),
                (Some(a), None) | (None, Some(a)) => a.iter().map(|z| z.norm()).fold(0.0, f64::max),
                (None, None) => 0.0,
            })
            .fold(0.0, f64::max)
    }

    /// `f(t)` at a point of the complexified group.
    pub fn evaluate(&self, table: &SigmaTable, t: &CMat) -> Result<C64> {
        let mut s = C64::new(0.0, 0.0);
        for (label, c) in &self.blocks {
            let irrep = table.irrep(label)?;
            let p = irrep.matrix(t);
            s += c.component_mul(&p).sum() * (irrep.dim as f64).sqrt();
        }
        Ok(s)
    }

    /// `((h1, h2)·f)(x) = f(h1⁻¹ x h2)`: `C ↦ π(h1⁻¹)ᵀ C π(h2)ᵀ`.
    pub fn act(&self, table: &SigmaTable, h1: &CMat, h2: &CMat) -> Result<Self> {
        let h1_inv = invert(h1)?;
        let mut out = Self::zero(self.cutoff);
        for (label, c) in &self.blocks {
            let irrep = table.irrep(label)?;
            let m = irrep.matrix(&h1_inv).transpose() * c * irrep.matrix(h2).transpose();
            out.blocks.insert(label.clone(), m);
        }
        Ok(out)
    }
}

/// `C_φ` in the Peter–Weyl basis: the block of `π` is scaled by
/// `σ(π̄)^{-1/2}`.
pub fn transform_c_phi(table: &SigmaTable, f: &PeterWeylVector) -> Result<PeterWeylVector> {
    if f.cutoff > table.cutoff {
        return Err(Error::Cutoff(format!(
            "vector cutoff {} exceeds σ table cutoff {}",
            f.cutoff, table.cutoff
        )));
    }
    let mut out = PeterWeylVector::zero(f.cutoff);
    for (label, c) in &f.blocks {
        let s = table.get(&label.dual())?;
        out.blocks
            .insert(label.clone(), c / C64::new(s.sqrt(), 0.0));
    }
    Ok(out)
}

/// Haar rule exact for products of two functions within the cutoff.
pub fn transform_rule(model: &LieModel, cutoff: usize) -> Vec<(CMat, f64)> {
    group_rule_nodes(model, 2 * cutoff.max(1))
}

/// `∫_G f(x) φ(x⁻¹t) dx` on a Haar rule.
pub fn transform_by_quadrature(
    table: &SigmaTable,
    nodes: &[(CMat, f64)],
    f: &dyn Fn(&CMat) -> C64,
    t: &CMat,
) -> Result<C64> {
    let mut s = C64::new(0.0, 0.0);
    for (x, w) in nodes {
        // φ(x⁻¹t) needs (x⁻¹t)⁻¹ = t⁻¹x.
        let t_inv_x = invert(t)? * x;
        s += f(x) * phi_at_inverse(table, &t_inv_x) * *w;
    }
    Ok(s)
}

/// A random point `x e^{iY}` of the complexified group.
fn random_complex_point<R: Rng + ?Sized>(
    model: &LieModel,
    rng: &mut R,
    scale: f64,
) -> Result<CMat> {
    let x = model.random_group_point(rng)?;
    let y = model.random_algebra(rng, scale);
    Ok(model.polar(&x, &y).into_matrix())
}

/// Quadrature of the defining integral against the diagonal rule, for a
/// list of sample functions and points.
pub fn diagonal_action_certificate(
    model: &LieModel,
    table: &SigmaTable,
    samples: usize,
    seed: u64,
) -> Result<CheckReport> {
    let nodes = transform_rule(model, table.cutoff);
    let results = par_samples(seed, 31, samples, |rng| -> Result<f64> {
        let f = PeterWeylVector::random(table, rng);
        let t = random_complex_point(model, rng, 0.5)?;
        let via_quad = transform_by_quadrature(
            table,
            &nodes,
            &|x| f.evaluate(table, x).unwrap_or_default(),
            &t,
        )?;
        let via_pw = transform_c_phi(table, &f)?.evaluate(table, &t)?;
        Ok((via_quad - via_pw).norm())
    });
    let err = max_abs(results.into_iter().map(|r| r.unwrap_or(f64::INFINITY)));
    Ok(CheckReport::new(
        "transform.diagonal",
        "C_phi pi_ab = sigma(pi)^-1/2 pi_ab^C",
        1e-8,
        err,
    )
    .with("samples", samples as u64)
    .with("rule_nodes", nodes.len() as u64))
}

/// Basis of the Gram checks.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum GramBasis {
    Characters,
    MatrixCoefficients,
}

/// Values of the chosen basis functions (holomorphically extended) at `t`.
fn basis_values(table: &SigmaTable, labels: &[IrrepLabel], basis: GramBasis, t: &CMat) -> Vec<C64> {
    let mut out = Vec::new();
    for label in labels {
        let irrep = &table.irreps[label];
        match basis {
            GramBasis::Characters => out.push(irrep.character(t)),
            GramBasis::MatrixCoefficients => {
                let p = irrep.matrix(t);
                let s = (irrep.dim as f64).sqrt();
                for a in 0..irrep.dim {
                    for b in 0..irrep.dim {
                        out.push(p[(a, b)] * s);
                    }
                }
            }
        }
    }
    out
}

/// `σ(π̄)^{-1/2}` per basis function, so the Gram of `C_φ b` is `D G D`.
fn transform_scales(
    table: &SigmaTable,
    labels: &[IrrepLabel],
    basis: GramBasis,
) -> Result<Vec<f64>> {
    let mut out = Vec::new();
    for label in labels {
        let s = table.get(&label.dual())?.powf(-0.5);
        let count = match basis {
            GramBasis::Characters => 1,
            GramBasis::MatrixCoefficients => table.irreps[label].dim.pow(2),
        };
        out.extend(std::iter::repeat_n(s, count));
    }
    Ok(out)
}

type Gram = Vec<Vec<C64>>;

/// Nodes per parallel work unit; fixed so sums do not depend on the thread
/// count.
const CHUNK: usize = 16;

/// `Σ_i w_i v_i v_i^†` over the rows `(v_i, w_i)`, as `Vᵀ W V̄`.
fn weighted_outer_sum(rows: &[(Vec<C64>, f64)], k: usize) -> CMat {
    let v = CMat::from_fn(rows.len(), k, |i, a| rows[i].0[a] * rows[i].1.sqrt());
    v.transpose() * v.map(|z| z.conj())
}

fn to_gram(m: &CMat) -> Gram {
    (0..m.nrows())
        .map(|a| (0..m.ncols()).map(|b| m[(a, b)]).collect())
        .collect()
}

fn gram_diff(a: &Gram, b: &Gram) -> f64 {
    a.iter()
        .zip(b)
        .flat_map(|(ra, rb)| ra.iter().zip(rb).map(|(x, y)| (x - y).norm()))
        .fold(0.0, f64::max)
}

fn gram_minus_identity(g: &Gram) -> f64 {
    let mut e: f64 = 0.0;
    for (a, row) in g.iter().enumerate() {
        for (b, x) in row.iter().enumerate() {
            let target = if a == b { 1.0 } else { 0.0 };
            e = e.max((x - target).norm());
        }
    }
    e
}

fn real_rows(g: &Gram) -> Vec<Vec<f64>> {
    g.iter().map(|r| r.iter().map(|x| x.re).collect()).collect()
}

/// Weight on `g` applied on top of `e^{-2π|Y|²}`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum FibreWeight {
    /// Liouville measure `ε`.
    Dolbeault,
    /// `η ε`.
    Spin,
}

/// Gram of the holomorphic basis functions over `G × g`, with a Cartesian
/// Gaussian rule on `g`.
fn gram_cartesian(
    model: &LieModel,
    table: &SigmaTable,
    labels: &[IrrepLabel],
    basis: GramBasis,
    g_nodes: &[(CMat, f64)],
    y_rule: &QuadratureRule,
    weight: FibreWeight,
) -> Gram {
    let k = basis_values(table, labels, basis, &model.identity().into_matrix()).len();
    let zero = AlgebraVec::zeros(model.dim());
    let idx: Vec<usize> = (0..y_rule.len()).collect();
    let partial: Vec<CMat> = idx
        .par_chunks(CHUNK)
        .map(|chunk| {
            let mut rows = Vec::with_capacity(chunk.len() * g_nodes.len());
            for &i in chunk {
                let y = AlgebraVec::new(y_rule.nodes[i].clone());
                let w_extra = match weight {
                    FibreWeight::Dolbeault => 1.0,
                    FibreWeight::Spin => eta(model, &y).unwrap_or(f64::NAN),
                };
                let e = model.exp_alg(&zero, &y).into_matrix();
                for (x, wx) in g_nodes {
                    rows.push((
                        basis_values(table, labels, basis, &(x * &e)),
                        y_rule.weights[i] * wx * w_extra,
                    ));
                }
            }
            weighted_outer_sum(&rows, k)
        })
        .collect();
    to_gram(
        &partial
            .into_iter()
            .fold(CMat::zeros(k, k), |acc, m| acc + m),
    )
}

/// Gram of Ad-invariant data over `G × su(2)` by the radial reduction
/// `Y = r e3`.
fn gram_radial(
    model: &LieModel,
    table: &SigmaTable,
    labels: &[IrrepLabel],
    g_nodes: &[(CMat, f64)],
    r_rule: &QuadratureRule,
    weight: FibreWeight,
) -> Gram {
    let k = labels.len();
    let zero = AlgebraVec::zeros(model.dim());
    let idx: Vec<usize> = (0..r_rule.len()).collect();
    let partial: Vec<CMat> = idx
        .par_chunks(CHUNK)
        .map(|chunk| {
            let mut rows = Vec::with_capacity(chunk.len() * g_nodes.len());
            for &i in chunk {
                let r = r_rule.nodes[i][0];
                let w_extra = match weight {
                    FibreWeight::Dolbeault => 1.0,
                    FibreWeight::Spin => sinhc(r),
                };
                let e = model.exp_alg(&zero, &model.torus_embed(&[r])).into_matrix();
                for (x, wx) in g_nodes {
                    let v = basis_values(table, labels, GramBasis::Characters, &(x * &e));
                    rows.push((v, 4.0 * PI * r * r * r_rule.weights[i] * wx * w_extra));
                }
            }
            weighted_outer_sum(&rows, k)
        })
        .collect();
    to_gram(
        &partial
            .into_iter()
            .fold(CMat::zeros(k, k), |acc, m| acc + m),
    )
}

pub struct GramResult {
    pub gram: Vec<Vec<C64>>,
    pub level: usize,
    pub delta: f64,
    pub rule: String,
}

/// Gram of holomorphic basis functions, doubling the fibre rule until
/// entries move by less than `1e-9`. Rules are sized for labels up to
/// `rule_cutoff` or the largest label, whichever is larger.
pub fn holomorphic_gram(
    model: &LieModel,
    table: &SigmaTable,
    labels: &[IrrepLabel],
    basis: GramBasis,
    weight: FibreWeight,
    rule_cutoff: usize,
) -> Result<GramResult> {
    let height = labels
        .iter()
        .map(IrrepLabel::height)
        .fold(rule_cutoff as f64, f64::max);
    let g_nodes = group_rule_nodes(model, 2 * (height.ceil() as usize).max(1));
    let radial = matches!(model.kind(), ModelKind::Su2) && basis == GramBasis::Characters;
    let (start, max) = match (radial, model.dim()) {
        (true, _) => (32, 512),
        (false, 1) => (32, 512),
        (false, 2) => (24, 96),
        _ => (12, 24),
    };
    // Characters grow like e^{2 h r} in the product of two of them.
    let growth = 4.0 * height * model.positive_roots().len().max(1) as f64;
    let compute = |lvl: usize| {
        if radial {
            gram_radial(
                model,
                table,
                labels,
                &g_nodes,
                &radial_rule(lvl, growth),
                weight,
            )
        } else {
            gram_cartesian(
                model,
                table,
                labels,
                basis,
                &g_nodes,
                &gaussian_rule(model.dim(), lvl),
                weight,
            )
        }
    };
    let mut level = start;
    let mut prev = compute(level);
    let mut delta = f64::INFINITY;
    while level * 2 <= max {
        level *= 2;
        let next = compute(level);
        delta = gram_diff(&prev, &next);
        prev = next;
        if delta < 1e-9 {
            break;
        }
    }
    Ok(GramResult {
        gram: prev,
        level,
        delta,
        rule: if radial {
            "radial Gauss-Legendre x Haar".into()
        } else {
            "Gauss-Hermite x Haar".into()
        },
    })
}

/// Gram of `{C_φ b_i}` in `HL²(e^{-2π|Y|²} ε)`.
pub fn transformed_gram(
    model: &LieModel,
    table: &SigmaTable,
    cutoff: usize,
    rule_cutoff: usize,
    basis: GramBasis,
) -> Result<GramResult> {
    let labels = labels_up_to(model, cutoff)?;
    let mut g = holomorphic_gram(
        model,
        table,
        &labels,
        basis,
        FibreWeight::Dolbeault,
        rule_cutoff,
    )?;
    let d = transform_scales(table, &labels, basis)?;
    for (a, row) in g.gram.iter_mut().enumerate() {
        for (b, x) in row.iter_mut().enumerate() {
            *x *= d[a] * d[b];
        }
    }
    Ok(g)
}

/// The character basis is orthonormal for SU(2) and every basis function is
/// a character on tori, so the target Gram is the identity in all cases.
pub fn unitarity_certificate(model: &LieModel, cutoff: usize) -> Result<CheckReport> {
    let table = SigmaTable::build(model, cutoff + 2)?;
    let basis = if model.is_abelian() {
        GramBasis::MatrixCoefficients
    } else {
        GramBasis::Characters
    };
    let main = transformed_gram(model, &table, cutoff, cutoff, basis)?;
    let tol = match model.kind() {
        ModelKind::Su2 => 1e-4,
        _ => 1e-6,
    };
    let mut parts = vec![CheckReport::new(
        "transform.unitarity.gram",
        "|| C_phi f ||_HL2 = || f ||_L2",
        tol,
        gram_minus_identity(&main.gram),
    )
    .with("basis_size", main.gram.len() as u64)
    .with("level", main.level as u64)
    .with("doubling_delta", main.delta)
    .with("rule", main.rule.clone())];

    // Tail control: the reported entries are stable when every rule is
    // resized for cutoff N + 2.
    let wider = transformed_gram(model, &table, cutoff, cutoff + 2, basis)?;
    let k = main.gram.len();
    let tail = (0..k)
        .flat_map(|a| (0..k).map(move |b| (a, b)))
        .map(|(a, b)| (main.gram[a][b] - wider.gram[a][b]).norm())
        .fold(0.0, f64::max);
    parts.push(
        CheckReport::new("transform.unitarity.tail", "cutoff N -> N + 2", 1e-8, tail)
            .with("cutoff", cutoff as u64)
            .with("wider_cutoff", (cutoff + 2) as u64),
    );

    if matches!(model.kind(), ModelKind::Su2) {
        // Non-class functions on the full 3-dimensional fibre, j <= 1.
        let mc = transformed_gram(
            model,
            &table,
            cutoff.min(1),
            cutoff.min(1),
            GramBasis::MatrixCoefficients,
        )?;
        parts.push(
            CheckReport::new(
                "transform.unitarity.matrix_coefficients",
                "|| C_phi f ||_HL2 = || f ||_L2",
                1e-4,
                gram_minus_identity(&mc.gram),
            )
            .with("basis_size", mc.gram.len() as u64)
            .with("level", mc.level as u64)
            .with("doubling_delta", mc.delta),
        );
    }
    let single = {
        let label = labels_up_to(model, 0)?.remove(0);
        let g = transformed_gram(model, &table, 0, 0, GramBasis::Characters)?;
        CheckReport::new(
            "transform.unitarity.trivial",
            &format!("|| C_phi chi_0 || = 1 ({label})"),
            tol,
            (g.gram[0][0].re - 1.0).abs(),
        )
    };
    parts.push(single);
    Ok(
        CheckReport::combine("transform.unitarity", "C_phi: L2(G) -> HL2 unitary", parts)
            .with("cutoff", cutoff as u64)
            .with("model", model.name())
            .with_heatmap("Gram of C_phi b_i", &real_rows(&main.gram)),
    )
}

/// Gram of holomorphic characters under `e^{-2π|Y|²} η ε` and `e^{-2π|Y|²} ε`.
pub fn spin_weighted_gram(model: &LieModel, cutoff: usize) -> Result<CheckReport> {
    let table = SigmaTable::build(model, cutoff)?;
    let labels = labels_up_to(model, cutoff)?;
    let spin = holomorphic_gram(
        model,
        &table,
        &labels,
        GramBasis::Characters,
        FibreWeight::Spin,
        cutoff,
    )?;
    let flat = holomorphic_gram(
        model,
        &table,
        &labels,
        GramBasis::Characters,
        FibreWeight::Dolbeault,
        cutoff,
    )?;
    let k = labels.len();
    let mut off: f64 = 0.0;
    let mut min_diag = f64::INFINITY;
    for a in 0..k {
        for b in 0..k {
            if a == b {
                let d = spin.gram[a][a];
                min_diag = min_diag.min(if d.re.is_finite() && d.im.abs() < 1e-9 {
                    d.re
                } else {
                    f64::NAN
                });
            } else {
                off = off.max(spin.gram[a][b].norm());
            }
        }
    }
    let mut parts = vec![
        CheckReport::condition(
            "transform.spin_gram.diagonal",
            "diagonal finite, positive",
            min_diag > 0.0,
        )
        .with("min_diagonal", min_diag),
        CheckReport::new(
            "transform.spin_gram.off_diagonal",
            "Schur orthogonality",
            1e-6,
            off,
        ),
    ];
    if model.is_abelian() {
        parts.push(CheckReport::new(
            "transform.spin_gram.torus_coincide",
            "eta = 1 on tori",
            1e-12,
            gram_diff(&spin.gram, &flat.gram),
        ));
    }
    let diag = |g: &GramResult| -> Vec<f64> { (0..k).map(|a| g.gram[a][a].re).collect() };
    Ok(
        CheckReport::combine("transform.spin_gram", "e^{-2 pi |Y|^2} eta epsilon", parts)
            .with_json(
                "labels",
                &labels.iter().map(|l| l.to_string()).collect::<Vec<_>>(),
            )
            .with_json("spin_diagonal", &diag(&spin))
            .with_json("dolbeault_diagonal", &diag(&flat))
            .with_heatmap(
                "eta-weighted Gram of holomorphic characters",
                &real_rows(&spin.gram),
            ),
    )
}

/// `C_φ((h1,h2)·f) = (h1,h2)·(C_φ f)`, both through the Peter–Weyl algebra
/// and through quadrature of the defining integral.
pub fn equivariance_certificate(
    model: &LieModel,
    table: &SigmaTable,
    samples: usize,
    seed: u64,
) -> Result<CheckReport> {
    let nodes = transform_rule(model, table.cutoff);
    let res = par_samples(seed, 32, samples, |rng| -> Result<(f64, f64)> {
        let f = PeterWeylVector::random(table, rng);
        let h1 = model.random_group_point(rng)?.into_matrix();
        let h2 = model.random_group_point(rng)?.into_matrix();
        let t = random_complex_point(model, rng, 0.5)?;
        let moved = f.act(table, &h1, &h2)?;
        let algebra = transform_c_phi(table, &moved)?
            .max_diff(&transform_c_phi(table, &f)?.act(table, &h1, &h2)?);
        let lhs = transform_by_quadrature(
            table,
            &nodes,
            &|x| moved.evaluate(table, x).unwrap_or_default(),
            &t,
        )?;
        let shifted = invert(&h1)? * &t * &h2;
        let rhs = transform_by_quadrature(
            table,
            &nodes,
            &|x| f.evaluate(table, x).unwrap_or_default(),
            &shifted,
        )?;
        Ok((algebra, (lhs - rhs).norm()))
    });
    let mut algebra: f64 = 0.0;
    let mut quad: f64 = 0.0;
    for r in res {
        match r {
            Ok((a, q)) => {
                algebra = algebra.max(a);
                quad = quad.max(q);
            }
            Err(_) => {
                algebra = f64::INFINITY;
                quad = f64::INFINITY;
            }
        }
    }
    let mut parts = vec![
        CheckReport::new(
            "transform.equivariance.peter_weyl",
            "G x G equivariance",
            1e-8,
            algebra,
        ),
        CheckReport::new(
            "transform.equivariance.quadrature",
            "G x G equivariance",
            1e-8,
            quad,
        ),
    ];
    if let ModelKind::Su2 = model.kind() {
        parts.push(weyl_equivariance(model, samples, seed)?);
    }
    Ok(
        CheckReport::combine("transform.equivariance", "C_phi intertwines G x G", parts)
            .with("samples", samples as u64),
    )
}

/// Action of a Weyl element on torus Peter–Weyl vectors: `(w f)(y) = f(w⁻¹ y)`.
pub fn weyl_act_torus(
    torus: &LieModel,
    w: &WeylElement,
    f: &PeterWeylVector,
) -> Result<PeterWeylVector> {
    let ModelKind::Torus { scales } = torus.kind() else {
        return Err(Error::Model(
            "Weyl action on Peter-Weyl vectors needs a torus model".into(),
        ));
    };
    let inv = w
        .matrix
        .clone()
        .try_inverse()
        .ok_or_else(|| Error::Numerical("singular Weyl matrix".into()))?;
    let mut out = PeterWeylVector::zero(f.cutoff);
    for (label, c) in &f.blocks {
        let IrrepLabel::Torus(n) = label else {
            return Err(Error::Model(format!("{label} is not a torus label")));
        };
        let mut image = Vec::with_capacity(n.len());
        for k in 0..n.len() {
            let v: f64 = (0..n.len())
                .map(|j| n[j] as f64 * scales[j] * inv[(j, k)])
                .sum::<f64>()
                / scales[k];
            if (v - v.round()).abs() > 1e-9 {
                return Err(Error::Numerical(format!(
                    "Weyl image of {label} is not integral"
                )));
            }
            image.push(v.round() as i64);
        }
        out.blocks.insert(IrrepLabel::Torus(image), c.clone());
    }
    Ok(out)
}

/// `C'_φ` on the maximal torus commutes with the Weyl group of `G`.
fn weyl_equivariance(model: &LieModel, samples: usize, seed: u64) -> Result<CheckReport> {
    let torus = model.maximal_torus()?;
    let table = SigmaTable::build(&torus, default_cutoff(&torus))?;
    let nodes = transform_rule(&torus, table.cutoff);
    let weyl = model.weyl_group()?;
    let mut err: f64 = 0.0;
    let mut sigma_sym: f64 = 0.0;
    for w in &weyl {
        for label in table.labels() {
            let image = weyl_act_torus(
                &torus,
                w,
                &PeterWeylVector::character(table.irrep(label)?, table.cutoff)?,
            )?;
            for l in image.blocks.keys() {
                if let Ok(s) = table.get(l) {
                    sigma_sym = sigma_sym.max((s - table.get(label)?).abs() / s);
                }
            }
        }
        for i in 0..samples {
            let mut rng = sample_rng(seed, 33, i as u64);
            let f = PeterWeylVector::random(&table, &mut rng);
            let wf = weyl_act_torus(&torus, w, &f)?;
            let y_t: Vec<f64> = (0..torus.rank())
                .map(|_| rng.random_range(-2.0..2.0))
                .collect();
            let s: Vec<f64> = (0..torus.rank())
                .map(|_| rng.random_range(-0.5..0.5))
                .collect();
            let t = torus
                .exp_alg(&AlgebraVec::new(y_t.clone()), &AlgebraVec::new(s.clone()))
                .into_matrix();
            // (w g)(t) = g(w⁻¹ t); w⁻¹ acts on Y + iS linearly.
            let inv = w
                .matrix
                .clone()
                .try_inverse()
                .ok_or_else(|| Error::Numerical("singular Weyl matrix".into()))?;
            let wy = AlgebraVec::from_dvector(&inv * nalgebra::DVector::from_vec(y_t));
            let ws = AlgebraVec::from_dvector(&inv * nalgebra::DVector::from_vec(s));
            let t_w = torus.exp_alg(&wy, &ws).into_matrix();
            let lhs = transform_by_quadrature(
                &table,
                &nodes,
                &|x| wf.evaluate(&table, x).unwrap_or_default(),
                &t,
            )?;
            let rhs = transform_by_quadrature(
                &table,
                &nodes,
                &|x| f.evaluate(&table, x).unwrap_or_default(),
                &t_w,
            )?;
            err = err.max((lhs - rhs).norm());
        }
    }
    Ok(CheckReport::combine(
        "transform.equivariance.weyl",
        "C'_phi is W-equivariant",
        vec![
            CheckReport::new(
                "transform.equivariance.weyl.commutation",
                "C'_phi w = w C'_phi",
                1e-8,
                err,
            )
            .with("torus", torus.name()),
            CheckReport::new(
                "transform.sigma_symmetry",
                "sigma(pi o w) = sigma(pi)",
                1e-10,
                sigma_sym,
            ),
        ],
    ))
}

/// `C_φ` on the Peter–Weyl basis restricted to `G`, projected back onto the
/// basis: block-off-diagonal leakage and the diagonal factor.
pub fn block_leakage_certificate(model: &LieModel, table: &SigmaTable) -> Result<CheckReport> {
    let labels: Vec<IrrepLabel> = table.labels().cloned().collect();
    let nodes = transform_rule(model, table.cutoff);
    let n = nodes.len();
    let values: Vec<Vec<C64>> = nodes
        .iter()
        .map(|(x, _)| basis_values(table, &labels, GramBasis::MatrixCoefficients, x))
        .collect();
    let owner: Vec<usize> = labels
        .iter()
        .enumerate()
        .flat_map(|(i, l)| std::iter::repeat_n(i, table.irreps[l].dim.pow(2)))
        .collect();
    let scale = transform_scales(table, &labels, GramBasis::MatrixCoefficients)?;
    // K[i][k] = φ(x_i⁻¹ x_k), needing (x_i⁻¹ x_k)⁻¹ = x_k⁻¹ x_i.
    let kernel: Vec<Vec<C64>> = (0..n)
        .into_par_iter()
        .map(|i| {
            (0..n)
                .map(|k| {
                    let m = nodes[k].0.adjoint() * &nodes[i].0;
                    phi_at_inverse(table, &m)
                })
                .collect()
        })
        .collect();
    let k = owner.len();
    let rows: Vec<(f64, f64)> = (0..k)
        .into_par_iter()
        .map(|p| {
            let image: Vec<C64> = (0..n)
                .map(|kk| {
                    (0..n)
                        .map(|i| values[i][p] * kernel[i][kk] * nodes[i].1)
                        .sum()
                })
                .collect();
            let mut leak: f64 = 0.0;
            let mut diag: f64 = 0.0;
            for q in 0..k {
                let c: C64 = (0..n)
                    .map(|kk| image[kk] * values[kk][q].conj() * nodes[kk].1)
                    .sum();
                let target = if p == q { scale[p] } else { 0.0 };
                if owner[p] == owner[q] {
                    diag = diag.max((c - target).norm());
                } else {
                    leak = leak.max(c.norm());
                }
            }
            (leak, diag)
        })
        .collect();
    let leak = rows.iter().map(|r| r.0).fold(0.0, f64::max);
    let diag = rows.iter().map(|r| r.1).fold(0.0, f64::max);
    Ok(CheckReport::combine(
        "transform.block_diagonal",
        "C_phi preserves Peter-Weyl blocks",
        vec![
            CheckReport::new(
                "transform.block_diagonal.leakage",
                "off-block coefficients vanish",
                1e-10,
                leak,
            ),
            CheckReport::new(
                "transform.block_diagonal.factor",
                "block factor sigma^-1/2",
                1e-10,
                diag,
            ),
        ],
    )
    .with("basis_size", k as u64)
    .with("rule_nodes", n as u64))
}

/// `‖f‖²_{L²(G)} = Σ|c|²` on random trigonometric polynomials.
pub fn parseval_certificate(
    model: &LieModel,
    table: &SigmaTable,
    samples: usize,
    seed: u64,
) -> Result<CheckReport> {
    let nodes = transform_rule(model, table.cutoff);
    let res = par_samples(seed, 34, samples, |rng| -> Result<f64> {
        let f =
            PeterWeylVector::random(table, rng).scale(C64::new(rng.random_range(0.5..2.0), 0.0));
        let mut q = 0.0;
        for (x, w) in &nodes {
            q += f.evaluate(table, x)?.norm_sqr() * w;
        }
        Ok((q - f.norm_sq()).abs())
    });
    let err = max_abs(res.into_iter().map(|r| r.unwrap_or(f64::INFINITY)));
    Ok(
        CheckReport::new("transform.parseval", "||f||^2 = sum |c|^2", 1e-10, err)
            .with("samples", samples as u64),
    )
}

/// `σ` by quadrature against the closed forms.
pub fn sigma_certificate(model: &LieModel, table: &SigmaTable) -> Result<CheckReport> {
    let mut abs_err: f64 = 0.0;
    let mut rel_err: f64 = 0.0;
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    for (label, s) in &table.entries {
        let exact = sigma_closed_form(model, label)?;
        abs_err = abs_err.max((s.value - exact).abs());
        rel_err = rel_err.max((s.value - exact).abs() / exact);
        xs.push(label.height());
        ys.push(s.value);
    }
    Ok(CheckReport::new(
        "transform.sigma",
        "sigma(pi) = (1/d) int ||pi(e^{iY})^-1||^2 e^{-2 pi |Y|^2} dY",
        1e-10,
        abs_err,
    )
    .with("relative_error", rel_err)
    .with("quadrature_error_estimate", table.error_estimate())
    .with("sigma", table.to_json())
    .with_series("sigma by label height", &xs, &ys, false))
}

/// Transform suite with the default sampling.
pub fn transform_certificates(
    model: &LieModel,
    cutoff: usize,
    seed: u64,
) -> Result<Vec<CheckReport>> {
    let table = SigmaTable::build(model, cutoff)?;
    Ok(vec![
        sigma_certificate(model, &table)?,
        diagonal_action_certificate(model, &table, 16, seed)?,
        unitarity_certificate(model, cutoff)?,
        equivariance_certificate(model, &table, 16, seed)?,
        spin_weighted_gram(model, cutoff)?,
        block_leakage_certificate(model, &table)?,
        parseval_certificate(model, &table, 16, seed)?,
    ])
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64) -> C64 {
        C64::new(re, 0.0)
    }

    #[test]
    fn sigma_u1_closed_form() {
        let m = LieModel::u1();
        let t = SigmaTable::build(&m, 8).unwrap();
        assert!(
            (t.get(&IrrepLabel::Torus(vec![0])).unwrap() - 0.707_106_781_186_547_5).abs() < 1e-14
        );
        for n in -8..=8 {
            let l = IrrepLabel::Torus(vec![n]);
            let exact = ((n * n) as f64 / (2.0 * PI)).exp() / 2f64.sqrt();
            assert!((t.get(&l).unwrap() - exact).abs() / exact < 1e-13, "n={n}");
        }
        assert!(matches!(
            t.get(&IrrepLabel::Torus(vec![9])),
            Err(Error::Cutoff(_))
        ));
    }

    #[test]
    fn sigma_su2_radial_matches_closed_form() {
        let m = LieModel::su2();
        let t = SigmaTable::build(&m, 2).unwrap();
        for tj in 0..=4 {
            let l = IrrepLabel::Su2 { twice_j: tj };
            let exact = sigma_closed_form(&m, &l).unwrap();
            assert!((t.get(&l).unwrap() - exact).abs() < 1e-12, "{l}");
        }
        assert!((t.get(&IrrepLabel::Su2 { twice_j: 0 }).unwrap() - 2f64.powf(-1.5)).abs() < 1e-14);
    }

    #[test]
    fn phi_u1_direct_sum() {
        let m = LieModel::u1();
        let t = SigmaTable::build(&m, 4).unwrap();
        let theta: f64 = 0.7;
        let p = phi_kernel(&t, &CMat::from_element(1, 1, C64::from_polar(1.0, theta))).unwrap();
        let direct: C64 = (-4..=4)
            .map(|n: i64| {
                let s = ((n * n) as f64 / (2.0 * PI)).exp() / 2f64.sqrt();
                C64::from_polar(s.powf(-0.5), -(n as f64) * theta)
            })
            .sum();
        assert!((p - direct).norm() < 1e-12);
    }

    #[test]
    fn transform_of_zero_and_characters() {
        let m = LieModel::u1();
        let t = SigmaTable::build(&m, 3).unwrap();
        let z = PeterWeylVector::zero(3);
        assert_eq!(transform_c_phi(&t, &z).unwrap().norm_sq(), 0.0);
        let chi =
            PeterWeylVector::character(t.irrep(&IrrepLabel::Torus(vec![2])).unwrap(), 3).unwrap();
        let out = transform_c_phi(&t, &chi).unwrap();
        let s = t.get(&IrrepLabel::Torus(vec![-2])).unwrap();
        assert!((out.blocks[&IrrepLabel::Torus(vec![2])][(0, 0)] - c(s.powf(-0.5))).norm() < 1e-15);
        let big = PeterWeylVector::zero(5);
        assert!(matches!(transform_c_phi(&t, &big), Err(Error::Cutoff(_))));
    }

    #[test]
    fn u1_translation_phase() {
        let m = LieModel::u1();
        let t = SigmaTable::build(&m, 2).unwrap();
        let chi =
            PeterWeylVector::character(t.irrep(&IrrepLabel::Torus(vec![2])).unwrap(), 2).unwrap();
        let a: f64 = 0.4;
        let h = CMat::from_element(1, 1, C64::from_polar(1.0, a));
        let moved = chi.act(&t, &h, &CMat::identity(1, 1)).unwrap();
        let phase = moved.blocks[&IrrepLabel::Torus(vec![2])][(0, 0)];
        assert!((phase - C64::from_polar(1.0, -2.0 * a)).norm() < 1e-14);
    }

    #[test]
    fn identity_action_is_exact() {
        let m = LieModel::su2();
        let t = SigmaTable::build(&m, 1).unwrap();
        let f = PeterWeylVector::random(&t, &mut sample_rng(1, 0, 0));
        let e = CMat::identity(2, 2);
        assert_eq!(f.act(&t, &e, &e).unwrap().max_diff(&f), 0.0);
    }

    #[test]
    fn su2_half_character_by_quadrature() {
        let m = LieModel::su2();
        let t = SigmaTable::build(&m, 1).unwrap();
        let nodes = transform_rule(&m, 1);
        let half = IrrepLabel::Su2 { twice_j: 1 };
        let point = m
            .polar(
                &m.exp(&AlgebraVec::new(vec![0.3, -0.2, 0.5])),
                &AlgebraVec::new(vec![0.1, 0.4, -0.3]),
            )
            .into_matrix();
        let q = transform_by_quadrature(&t, &nodes, &|x| x.trace(), &point).unwrap();
        let expected = point.trace() / t.get(&half).unwrap().sqrt();
        assert!((q - expected).norm() < 1e-12);
    }

    #[test]
    fn weyl_flip_negates_torus_labels() {
        let su2 = LieModel::su2();
        let torus = su2.maximal_torus().unwrap();
        let t = SigmaTable::build(&torus, 3).unwrap();
        let w = su2
            .weyl_group()
            .unwrap()
            .into_iter()
            .find(|w| !w.is_identity(1e-12))
            .unwrap();
        let chi =
            PeterWeylVector::character(t.irrep(&IrrepLabel::Torus(vec![3])).unwrap(), 3).unwrap();
        let img = weyl_act_torus(&torus, &w, &chi).unwrap();
        assert!(img.blocks.contains_key(&IrrepLabel::Torus(vec![-3])));
    }
}
