//! Config-driven front end: builds coverings, dumps tilings and window
//! profiles, runs transforms, and executes the verification and rate suites.
//! All randomness flows from one seed, so reruns with the same config are
//! byte-identical.

use crate::anisotropy::Anisotropy;
use crate::approx_rates::{
    bernstein_equal_coefficient_ratio, bernstein_experiment, bernstein_experiment_f_domain,
    counting_bound_check, counting_pool, jackson_experiment,
};
use crate::brushlet1d::{brushlet_freq_eval, Bell, RampProfile};
use crate::covering::{layer_to_json, tiling_svg, verify_alpha_covering, Covering, CoveringSpec};
use crate::error::{Error, Result};
use crate::grid::{GridFunction, SampledAxis};
use crate::quad;
use crate::seqnorm::{cell, f_norm, m_norm, NormParams, SpatialQuad};
use crate::tensor_basis::{
    axes_for_layer_windows, axes_for_tiles, enumerate_active, layer_projection, project_rect,
    BrushIndex,
};
use crate::transform::{
    analyze, coefficients_to_json, grid_to_binary, parseval_report, synthesize, GaussianFreq,
};
use num_complex::Complex64;
use rand::RngExt;
use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;
use std::fmt::Write as _;
use std::path::Path;

/// Versioned run configuration. Unknown keys are rejected.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub version: u32,
    pub anisotropy: Vec<f64>,
    pub alpha: f64,
    #[serde(default)]
    pub cutoff_fracs: Option<Vec<f64>>,
    #[serde(default = "default_j_max")]
    pub j_max: u32,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub partition: Option<PartitionBlock>,
    #[serde(default)]
    pub bells: Option<BellsBlock>,
    #[serde(default)]
    pub transform: Option<TransformBlock>,
    #[serde(default)]
    pub verify: Option<VerifyBlock>,
    #[serde(default)]
    pub jackson: Vec<JacksonBlock>,
    #[serde(default)]
    pub bernstein: Vec<BernsteinBlock>,
    #[serde(default)]
    pub counting: Vec<CountingBlock>,
}

fn default_j_max() -> u32 {
    4
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PartitionBlock {
    #[serde(default)]
    pub svg: bool,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BellsBlock {
    pub j: u32,
    pub k: usize,
    #[serde(default)]
    pub n: Vec<u32>,
    #[serde(default = "default_samples")]
    pub samples: usize,
    #[serde(default = "default_ramp_order")]
    pub ramp_order: u32,
}

fn default_samples() -> usize {
    800
}

fn default_ramp_order() -> u32 {
    3
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TransformBlock {
    pub sigma: Vec<f64>,
    pub bound: f64,
    pub n_max: u32,
    #[serde(default = "default_oversample")]
    pub oversample: usize,
    #[serde(default = "default_ramp_order")]
    pub ramp_order: u32,
    /// Target grid for synthesis: per-dim [lo, hi] and counts.
    #[serde(default)]
    pub grid_bounds: Option<Vec<[f64; 2]>>,
    #[serde(default)]
    pub grid_counts: Option<Vec<usize>>,
    /// Norm rows to report on the computed coefficients.
    #[serde(default)]
    pub norms: Vec<NormRow>,
}

fn default_oversample() -> usize {
    16
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NormRow {
    pub kind: String, // "m" or "f"
    pub s: f64,
    pub p: f64,
    pub q: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VerifyBlock {
    #[serde(default = "default_verify_jmax")]
    pub j_max: u32,
    #[serde(default = "default_verify_samples")]
    pub samples: usize,
    /// Random grid functions for the projection-algebra residuals.
    #[serde(default = "default_projection_trials")]
    pub projection_trials: usize,
    /// Gram matrix size (number of brushlet indices sampled).
    #[serde(default = "default_gram_size")]
    pub gram_size: usize,
    #[serde(default = "default_oversample")]
    pub gram_oversample: usize,
}

fn default_verify_jmax() -> u32 {
    12
}

fn default_verify_samples() -> usize {
    2000
}

fn default_projection_trials() -> usize {
    5
}

fn default_gram_size() -> usize {
    200
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct JacksonBlock {
    pub anisotropy: Vec<f64>,
    pub alpha: f64,
    pub j_max: u32,
    pub gamma: f64,
    pub tau: f64,
    pub beta: f64,
    pub p: f64,
    pub t: f64,
    pub m_exponents: Vec<u32>,
    #[serde(default = "default_trials")]
    pub trials: usize,
    #[serde(default = "default_slope_tol")]
    pub slope_tol: f64,
}

fn default_trials() -> usize {
    5
}

fn default_slope_tol() -> f64 {
    0.1
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BernsteinBlock {
    pub anisotropy: Vec<f64>,
    pub alpha: f64,
    pub j_max: u32,
    #[serde(default = "default_variant")]
    pub variant: u8,
    pub gamma: f64,
    pub beta: f64,
    pub p: f64,
    pub t: f64,
    pub n_exponents: Vec<u32>,
    #[serde(default = "default_trials")]
    pub trials: usize,
    #[serde(default = "default_bernstein_tol")]
    pub slope_tol: f64,
    /// Layer for the closed-form equal-coefficient check (variant 1).
    #[serde(default)]
    pub closed_form_layer: Option<u32>,
}

fn default_variant() -> u8 {
    1
}

fn default_bernstein_tol() -> f64 {
    0.05
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CountingBlock {
    pub anisotropy: Vec<f64>,
    pub alpha: f64,
    pub j_max: u32,
    pub q_values: Vec<f64>,
    pub base_size: usize,
    #[serde(default = "default_counting_tol")]
    pub stability_tol: f64,
}

fn default_counting_tol() -> f64 {
    0.1
}

impl RunConfig {
    pub fn from_path(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        let cfg: RunConfig = serde_json::from_str(&text)
            .map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        if cfg.version != 1 {
            return Err(Error::Config(format!(
                "unsupported config version {}",
                cfg.version
            )));
        }
        Ok(cfg)
    }

    pub fn covering_spec(&self) -> Result<CoveringSpec> {
        let aniso = Anisotropy::new(self.anisotropy.clone())?;
        match &self.cutoff_fracs {
            Some(cuts) => CoveringSpec::with_cutoffs(self.alpha, aniso, cuts.clone()),
            None => CoveringSpec::new(self.alpha, aniso),
        }
    }
}

/// Outcome of one suite invocation: pass/fail lines plus file outputs.
#[derive(Debug, Clone, Serialize)]
pub struct SuiteOutcome {
    pub lines: Vec<String>,
    pub passed: bool,
}

impl SuiteOutcome {
    fn new() -> Self {
        Self {
            lines: Vec::new(),
            passed: true,
        }
    }

    fn check(&mut self, label: &str, ok: bool, detail: String) {
        self.lines.push(format!(
            "[{}] {label}: {detail}",
            if ok { "PASS" } else { "FAIL" }
        ));
        self.passed &= ok;
    }

    fn note(&mut self, label: &str, detail: String) {
        self.lines.push(format!("[info] {label}: {detail}"));
    }
}

fn write_out(dir: &Path, name: &str, bytes: &[u8]) -> Result<()> {
    std::fs::create_dir_all(dir)?;
    std::fs::write(dir.join(name), bytes)?;
    Ok(())
}

/// `partition`: layer JSON documents and, for d = 2, an SVG rendering.
pub fn cmd_partition(config: &RunConfig, out: &Path) -> Result<SuiteOutcome> {
    let mut outcome = SuiteOutcome::new();
    let spec = config.covering_spec()?;
    let covering = Covering::build(spec, config.j_max)?;
    for j in 0..=config.j_max {
        let doc = layer_to_json(&covering, j)?;
        write_out(
            out,
            &format!("layer_{j:03}.json"),
            serde_json::to_string_pretty(&doc)?.as_bytes(),
        )?;
    }
    let want_svg = config
        .partition
        .as_ref()
        .map(|p| p.svg)
        .unwrap_or(covering.spec().dim() == 2);
    if want_svg && covering.spec().dim() == 2 {
        write_out(
            out,
            "tiling.svg",
            tiling_svg(&covering, config.j_max)?.as_bytes(),
        )?;
    }
    let tiles: usize = (0..=config.j_max)
        .map(|j| covering.layer(j).map(|l| l.len()).unwrap_or(0))
        .sum();
    outcome.check(
        "partition",
        true,
        format!(
            "{} layers, {tiles} tiles written to {}",
            config.j_max + 1,
            out.display()
        ),
    );
    Ok(outcome)
}

/// `bells`: CSV profile dump of the bell and one brushlet of a tile.
pub fn cmd_bells(config: &RunConfig, out: &Path) -> Result<SuiteOutcome> {
    let mut outcome = SuiteOutcome::new();
    let block = config
        .bells
        .as_ref()
        .ok_or_else(|| Error::Config("bells command needs a bells block".into()))?;
    let spec = config.covering_spec()?;
    let covering = Covering::build(spec, config.j_max)?;
    let rect = covering.rect(block.j, block.k)?;
    let ramp = RampProfile::new(block.ramp_order)?;
    let n = if block.n.len() == rect.dim() {
        block.n.clone()
    } else {
        vec![0; rect.dim()]
    };
    let mut csv = String::from("dim,xi,bell,brushlet\n");
    for (i, iv) in rect.intervals.iter().enumerate() {
        let bell = Bell::from_interval(iv, ramp.clone())?;
        let (lo, hi) = bell.support();
        let margin = 0.1 * (hi - lo);
        for t in 0..block.samples {
            let xi = lo - margin + (hi - lo + 2.0 * margin) * t as f64 / (block.samples - 1) as f64;
            let b = bell.eval(xi);
            let w = brushlet_freq_eval(&bell, n[i], xi);
            writeln!(csv, "{i},{xi:.12e},{b:.12e},{w:.12e}").unwrap();
        }
    }
    write_out(out, "bells.csv", csv.as_bytes())?;
    outcome.check(
        "bells",
        true,
        format!("profiles of tile ({}, {}) written", block.j, block.k),
    );
    Ok(outcome)
}

/// `transform`: Gaussian analysis, Parseval report, optional synthesis grid,
/// optional norm rows.
pub fn cmd_transform(config: &RunConfig, out: &Path) -> Result<SuiteOutcome> {
    let mut outcome = SuiteOutcome::new();
    let block = config
        .transform
        .as_ref()
        .ok_or_else(|| Error::Config("transform command needs a transform block".into()))?;
    let spec = config.covering_spec()?;
    let covering = Covering::build(spec, config.j_max)?;
    let ramp = RampProfile::new(block.ramp_order)?;
    let f = GaussianFreq::new(block.sigma.clone());
    let coeffs = analyze(
        &f,
        &covering,
        &ramp,
        block.bound,
        block.n_max,
        block.oversample,
    )?;
    write_out(
        out,
        "coefficients.json",
        serde_json::to_string(&coefficients_to_json(&coeffs))?.as_bytes(),
    )?;
    let report = parseval_report(&f, &coeffs, block.bound, block.oversample);
    let mut csv = String::from("energy_f,energy_coeffs,ratio\n");
    writeln!(
        csv,
        "{:.15e},{:.15e},{:.15e}",
        report.energy_f, report.energy_coeffs, report.ratio
    )
    .unwrap();
    write_out(out, "parseval.csv", csv.as_bytes())?;
    outcome.check(
        "bessel",
        report.ratio <= 1.0 + 1e-6,
        format!("Parseval ratio {:.9}", report.ratio),
    );

    if let (Some(bounds), Some(counts)) = (&block.grid_bounds, &block.grid_counts) {
        let axes: Vec<SampledAxis> = bounds
            .iter()
            .zip(counts)
            .map(|(b, &c)| SampledAxis::uniform(b[0], b[1], c))
            .collect::<Result<_>>()?;
        let synth = synthesize(&coeffs, &covering, &ramp, axes)?;
        write_out(out, "synthesis.grid", &grid_to_binary(&synth)?)?;
        outcome.note("synthesis", format!("grid {:?} written", synth.sizes()));
    }

    if !block.norms.is_empty() {
        let mut csv = String::from("kind,s,p,q,value,exact,boundary_rel_error\n");
        for row in &block.norms {
            let params = NormParams::new(row.s, row.p, row.q, covering.spec())?;
            match row.kind.as_str() {
                "m" => {
                    let v = m_norm(&covering, &coeffs, &params)?;
                    writeln!(csv, "m,{},{},{},{v:.12e},true,0", row.s, row.p, row.q).unwrap();
                }
                "f" => {
                    // p = q collapses to the closed-form mixed norm (the
                    // cell measures are exactly |R|^{-1}); the integrator
                    // is reserved for genuinely mixed exponents.
                    if (row.p - row.q).abs() < 1e-14 {
                        let v = m_norm(&covering, &coeffs, &params)?;
                        writeln!(csv, "f,{},{},{},{v:.12e},true,0", row.s, row.p, row.q).unwrap();
                    } else {
                        let rep = f_norm(&covering, &coeffs, &params, &SpatialQuad::default())?;
                        writeln!(
                            csv,
                            "f,{},{},{},{:.12e},{},{:.3e}",
                            row.s, row.p, row.q, rep.value, rep.exact, rep.boundary_rel_error
                        )
                        .unwrap();
                    }
                }
                other => {
                    return Err(Error::Config(format!("unknown norm kind {other}")));
                }
            }
        }
        write_out(out, "norms.csv", csv.as_bytes())?;
    }
    Ok(outcome)
}

/// Max entrywise deviation of the Gram matrix from the identity over the
/// given brushlet indices, using separable pairwise quadrature.
pub fn gram_max_deviation(
    covering: &Covering,
    ramp: &RampProfile,
    indices: &[BrushIndex],
    oversample: usize,
) -> Result<f64> {
    // Distinct 1-d factors: (interval key, n) pairs per dimension.
    let d = covering.spec().dim();
    let bells: Vec<Vec<Bell>> = indices
        .iter()
        .map(|idx| {
            let rect = covering.rect(idx.j, idx.k)?;
            crate::tensor_basis::bells_for_rect(rect, ramp)
        })
        .collect::<Result<_>>()?;

    let pair_1d = |ba: &Bell, na: u32, bb: &Bell, nb: u32| -> f64 {
        let (alo, ahi) = ba.support();
        let (blo, bhi) = bb.support();
        let lo = alo.max(blo);
        let hi = ahi.min(bhi);
        if hi <= lo {
            return 0.0;
        }
        let mut breaks = ba.breakpoints().to_vec();
        breaks.extend_from_slice(&bb.breakpoints());
        let rate = PI * (na as f64 + 0.5) / ba.len() + PI * (nb as f64 + 0.5) / bb.len();
        let lambda = 2.0 * PI / rate;
        let cut = ba
            .eps_left()
            .min(ba.eps_right())
            .min(bb.eps_left())
            .min(bb.eps_right());
        let order = oversample.clamp(6, 48);
        let piece = cut.min(lambda * order as f64 / 8.0);
        let mut acc = 0.0;
        for (a, b) in quad::split_at_breakpoints(lo, hi, &breaks) {
            for (x, w) in quad::panel_nodes(a, b, piece, order) {
                acc += w * brushlet_freq_eval(ba, na, x) * brushlet_freq_eval(bb, nb, x);
            }
        }
        acc
    };

    use rayon::prelude::*;
    let worst = (0..indices.len())
        .into_par_iter()
        .map(|row| {
            let mut local = 0.0_f64;
            for col in row..indices.len() {
                let mut prod = 1.0;
                for dim in 0..d {
                    prod *= pair_1d(
                        &bells[row][dim],
                        indices[row].n[dim],
                        &bells[col][dim],
                        indices[col].n[dim],
                    );
                    if prod == 0.0 {
                        break;
                    }
                }
                let target = if row == col { 1.0 } else { 0.0 };
                local = local.max((prod - target).abs());
            }
            local
        })
        .reduce(|| 0.0, f64::max);
    Ok(worst)
}

/// Residuals of the projection algebra on random knot-aligned grid data:
/// (idempotence, adjacent annihilation, addition rule, nesting,
/// layer orthogonality, telescoping).
pub fn projection_algebra_residuals(
    covering: &Covering,
    ramp: &RampProfile,
    trials: usize,
    seed: u64,
) -> Result<Vec<(String, f64)>> {
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    let mut worst: Vec<(String, f64)> = vec![
        ("idempotence".into(), 0.0),
        ("adjacent_annihilation".into(), 0.0),
        ("addition_rule".into(), 0.0),
        ("nested_identity".into(), 0.0),
        ("layer_orthogonality".into(), 0.0),
        ("telescoping".into(), 0.0),
    ];
    let d = covering.spec().dim();

    for _ in 0..trials {
        // Per-tile identities on layer 1 axes.
        let axes = axes_for_tiles(covering, 1, 0.21)?;
        let mut f = GridFunction::zeros(axes);
        for v in f.values_mut() {
            *v = Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0));
        }
        let scale = 1.0 + f.max_abs();
        let layer = covering.layer(1)?;
        let r1 = &layer[0];
        let r2 = &layer[1];
        let p1 = project_rect(r1, ramp, &f)?;
        let p11 = project_rect(r1, ramp, &p1)?;
        worst[0].1 = worst[0].1.max(p11.max_abs_diff(&p1) / scale);
        let p21 = project_rect(r2, ramp, &p1)?;
        worst[1].1 = worst[1].1.max(p21.max_abs() / scale);

        // Univariate addition rule on the first dimension's corridor.
        let iv = covering.corridor(1, 0)?;
        if iv.len() >= 2 {
            let a = &iv[0];
            let b = &iv[1];
            let bell_a = Bell::from_interval(a, ramp.clone())?;
            let bell_b = Bell::from_interval(b, ramp.clone())?;
            let bell_ab = Bell::new(a.left, b.right, a.eps_left, b.eps_right, ramp.clone())?;
            let axis = SampledAxis::knot_aligned(
                &[
                    (a.left, a.eps_left),
                    (a.right, a.eps_right),
                    (b.right, b.eps_right),
                ],
                a.left - 2.0 * a.eps_left,
                b.right + 2.0 * b.eps_right,
                0.13,
            )?;
            let mut g = GridFunction::zeros(vec![axis]);
            for v in g.values_mut() {
                *v = Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0));
            }
            let gscale = 1.0 + g.max_abs();
            let pa = crate::brushlet1d::project_interval(&bell_a, &g)?;
            let pb = crate::brushlet1d::project_interval(&bell_b, &g)?;
            let mut sum = pa.clone();
            sum.axpy(Complex64::ONE, &pb);
            let pab = crate::brushlet1d::project_interval(&bell_ab, &g)?;
            worst[2].1 = worst[2].1.max(sum.max_abs_diff(&pab) / gscale);
        }

        // Nested identity on centered windows.
        {
            let ci = covering.spec().cutoff_fracs()[0];
            let bell_inner = Bell::new(-1.0, 1.0, ci, ci, ramp.clone())?;
            let beta = covering.spec().beta();
            let a0 = covering.spec().aniso().exponents()[0];
            let hi = (2.0_f64).powf(a0 * beta);
            let eps_hi = ci * (2.0_f64).powf(a0 * (beta - 1.0));
            let bell_outer = Bell::new(-hi, hi, eps_hi, eps_hi, ramp.clone())?;
            let axis = SampledAxis::knot_aligned(
                &[(-hi, eps_hi), (-1.0, ci), (1.0, ci), (hi, eps_hi)],
                -hi - 2.0 * eps_hi,
                hi + 2.0 * eps_hi,
                0.17,
            )?;
            let mut g = GridFunction::zeros(vec![axis]);
            for v in g.values_mut() {
                *v = Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0));
            }
            let gscale = 1.0 + g.max_abs();
            let pi = crate::brushlet1d::project_interval(&bell_inner, &g)?;
            let pj = crate::brushlet1d::project_interval(&bell_outer, &g)?;
            let pij = crate::brushlet1d::project_interval(&bell_inner, &pj)?;
            let pji = crate::brushlet1d::project_interval(&bell_outer, &pi)?;
            worst[3].1 = worst[3].1.max(pij.max_abs_diff(&pi) / gscale);
            worst[3].1 = worst[3].1.max(pji.max_abs_diff(&pi) / gscale);
        }

        // Layer orthogonality and telescoping on window axes.
        let axes = axes_for_layer_windows(covering, 2, 0.24)?;
        let mut h = GridFunction::zeros(axes);
        for v in h.values_mut() {
            *v = Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0));
        }
        let hscale = 1.0 + h.max_abs();
        let p0 = layer_projection(covering, 0, ramp, &h)?;
        let w1 = layer_projection(covering, 1, ramp, &h)?;
        let w2 = layer_projection(covering, 2, ramp, &h)?;
        let w12 = layer_projection(covering, 1, ramp, &w2)?;
        worst[4].1 = worst[4].1.max(w12.max_abs() / hscale);
        let w01 = layer_projection(covering, 0, ramp, &w1)?;
        worst[4].1 = worst[4].1.max(w01.max_abs() / hscale);
        // Telescoping: P_{W_0} + P_{W_1} + P_{W_2} = ⊗ P_{A_2}.
        let mut sum = p0.clone();
        sum.axpy(Complex64::ONE, &w1);
        sum.axpy(Complex64::ONE, &w2);
        let (outer, _) = crate::tensor_basis::layer_window_bells(covering, 2, ramp)?;
        let mut pa = h.clone();
        for (dim, bell) in outer.iter().enumerate() {
            pa = crate::brushlet1d::project_axis(bell, &pa, dim)?;
        }
        worst[5].1 = worst[5].1.max(sum.max_abs_diff(&pa) / hscale);
        let _ = d;
    }
    Ok(worst)
}

/// `verify`: covering report, projection-algebra residuals, Gram deviation.
pub fn cmd_verify(config: &RunConfig, out: &Path) -> Result<SuiteOutcome> {
    let mut outcome = SuiteOutcome::new();
    let block = config.verify.clone().unwrap_or(VerifyBlock {
        j_max: default_verify_jmax(),
        samples: default_verify_samples(),
        projection_trials: default_projection_trials(),
        gram_size: default_gram_size(),
        gram_oversample: default_oversample(),
    });
    let spec = config.covering_spec()?;
    let report = verify_alpha_covering(&spec, block.j_max, block.samples, config.seed)?;
    write_out(
        out,
        "covering_report.json",
        serde_json::to_string_pretty(&report)?.as_bytes(),
    )?;
    outcome.check(
        "partition",
        report.ok(),
        format!(
            "{} intervals checked over {} layers, {} violations",
            report.intervals_checked,
            report.layers_checked,
            report.violations.len()
        ),
    );

    let covering = Covering::build(spec, config.j_max.max(3))?;
    let ramp = RampProfile::default();
    let residuals =
        projection_algebra_residuals(&covering, &ramp, block.projection_trials, config.seed)?;
    let mut csv = String::from("identity,max_residual\n");
    let mut worst = 0.0_f64;
    for (name, value) in &residuals {
        writeln!(csv, "{name},{value:.3e}").unwrap();
        worst = worst.max(*value);
    }
    write_out(out, "projection_residuals.csv", csv.as_bytes())?;
    outcome.check(
        "projection_algebra",
        worst < 1e-10,
        format!("max residual {worst:.3e}"),
    );

    if covering.spec().dim() == 2 {
        // Stay inside the built layers: the reach of the last layer bounds
        // how far the enumeration may look.
        let spec = covering.spec();
        let jm = covering.j_max() as f64;
        let reach = spec
            .aniso()
            .exponents()
            .iter()
            .zip(spec.cutoff_fracs())
            .map(|(&ai, &ci)| jm.powf(ai * spec.beta()) - ci * jm.powf(ai * (spec.beta() - 1.0)))
            .fold(f64::INFINITY, f64::min);
        let active = enumerate_active(&covering, 0.9 * reach, 2)?;
        let indices: Vec<BrushIndex> = active.into_iter().take(block.gram_size).collect();
        let deviation = gram_max_deviation(&covering, &ramp, &indices, block.gram_oversample)?;
        let mut csv = String::from("indices,max_deviation\n");
        writeln!(csv, "{},{deviation:.3e}", indices.len()).unwrap();
        write_out(out, "gram.csv", csv.as_bytes())?;
        outcome.check(
            "gram_orthonormality",
            deviation < 1e-8,
            format!("{} indices, max |G - I| = {deviation:.3e}", indices.len()),
        );
    }
    Ok(outcome)
}

/// `approx`: Jackson, Bernstein, and counting suites from config blocks.
pub fn cmd_approx(config: &RunConfig, out: &Path) -> Result<SuiteOutcome> {
    let mut outcome = SuiteOutcome::new();
    let mut rate_csv = String::from("experiment,trial,m,sigma,fitted_upper,predicted\n");
    for (bi, block) in config.jackson.iter().enumerate() {
        let aniso = Anisotropy::new(block.anisotropy.clone())?;
        let covering = Covering::build(CoveringSpec::new(block.alpha, aniso)?, block.j_max)?;
        let m_list: Vec<usize> = block.m_exponents.iter().map(|&e| 1usize << e).collect();
        let exp = jackson_experiment(
            &covering,
            block.gamma,
            block.tau,
            block.beta,
            block.p,
            block.t,
            &m_list,
            block.trials,
            config.seed.wrapping_add(bi as u64),
        )?;
        for (trial, sigmas) in exp.sigma.iter().enumerate() {
            for (mi, &m) in exp.m_grid.iter().enumerate() {
                writeln!(
                    rate_csv,
                    "jackson_{bi},{trial},{m},{:.12e},{:.6},{:.6}",
                    sigmas[mi], exp.fitted_upper[trial], exp.predicted_slope
                )
                .unwrap();
            }
        }
        outcome.check(
            &format!("jackson_{bi}"),
            exp.residual <= block.slope_tol,
            format!(
                "r = {}, predicted {:.4}, worst fitted deviation {:.4}",
                exp.r, exp.predicted_slope, exp.residual
            ),
        );
        write_out(
            out,
            &format!("jackson_{bi}.json"),
            serde_json::to_string_pretty(&exp)?.as_bytes(),
        )?;
    }

    for (bi, block) in config.bernstein.iter().enumerate() {
        let aniso = Anisotropy::new(block.anisotropy.clone())?;
        let covering = Covering::build(CoveringSpec::new(block.alpha, aniso)?, block.j_max)?;
        let n_list: Vec<usize> = block.n_exponents.iter().map(|&e| 1usize << e).collect();
        let report = match block.variant {
            1 => bernstein_experiment(
                &covering,
                block.gamma,
                block.beta,
                block.p,
                block.t,
                &n_list,
                block.trials,
                config.seed.wrapping_add(100 + bi as u64),
            )?,
            2 => bernstein_experiment_f_domain(
                &covering,
                block.gamma,
                block.beta,
                block.p,
                block.t,
                &n_list,
                block.trials,
                config.seed.wrapping_add(100 + bi as u64),
            )?,
            v => return Err(Error::Config(format!("unknown bernstein variant {v}"))),
        };
        let mut ok = report.slope <= block.slope_tol;
        let mut detail = format!(
            "variant {}, growth slope {:.4}",
            report.variant, report.slope
        );
        if block.variant == 1 {
            let layer = block.closed_form_layer.unwrap_or(block.j_max.min(9));
            for n in [1usize, 8, 64] {
                let ratio = bernstein_equal_coefficient_ratio(
                    &covering,
                    block.gamma,
                    block.beta,
                    block.p,
                    block.t,
                    layer,
                    n,
                )?;
                if (ratio - 1.0).abs() > 1e-10 {
                    ok = false;
                    write!(detail, "; closed-form ratio at n = {n} off: {ratio}").unwrap();
                }
            }
            write!(detail, "; closed-form ratio = 1 exact").unwrap();
        }
        outcome.check(&format!("bernstein_{bi}"), ok, detail);
        write_out(
            out,
            &format!("bernstein_{bi}.json"),
            serde_json::to_string_pretty(&report)?.as_bytes(),
        )?;
    }

    for (bi, block) in config.counting.iter().enumerate() {
        let aniso = Anisotropy::new(block.anisotropy.clone())?;
        let covering = Covering::build(CoveringSpec::new(block.alpha, aniso)?, block.j_max)?;
        let pool = counting_pool(
            &covering,
            2 * block.base_size,
            config.seed.wrapping_add(300 + bi as u64),
        )?;
        if pool.len() < 2 * block.base_size {
            return Err(Error::Config(format!(
                "counting block {bi}: pool holds only {} indices",
                pool.len()
            )));
        }
        let small: Vec<BrushIndex> = pool.iter().take(block.base_size).cloned().collect();
        let large: Vec<BrushIndex> = pool.iter().take(2 * block.base_size).cloned().collect();
        let aniso = covering.spec().aniso().clone();
        let mut rng = ChaCha12Rng::seed_from_u64(config.seed.wrapping_add(200 + bi as u64));
        let mut pts = Vec::new();
        for idx in large.iter().step_by(3) {
            let rect = covering.rect(idx.j, idx.k)?;
            let c = cell(rect, &idx.n, &aniso);
            pts.push(c.center.clone());
            let jitter: Vec<f64> = c
                .center
                .iter()
                .enumerate()
                .map(|(i, &v)| v + rng.random_range(-0.2..0.2) * c.extent(i, &aniso))
                .collect();
            pts.push(jitter);
        }
        let mut ok = true;
        let mut detail = String::new();
        for &q in &block.q_values {
            let c1 = counting_bound_check(&covering, &small, q, &pts)?;
            let c2 = counting_bound_check(&covering, &large, q, &pts)?;
            let drift = (c2 - c1).abs() / c1.max(c2);
            write!(
                detail,
                "q = {q}: C {c1:.4} -> {c2:.4} ({:.1}%); ",
                100.0 * drift
            )
            .unwrap();
            ok &= drift <= block.stability_tol && c2 > 0.0;
        }
        outcome.check(&format!("counting_{bi}"), ok, detail);
    }

    if !config.jackson.is_empty() {
        write_out(out, "rates.csv", rate_csv.as_bytes())?;
    }
    Ok(outcome)
}

/// Generic runner: executes every block present in the config.
pub fn cmd_run(config: &RunConfig, out: &Path) -> Result<SuiteOutcome> {
    let mut outcome = SuiteOutcome::new();
    if config.partition.is_some() {
        let sub = cmd_partition(config, out)?;
        outcome.lines.extend(sub.lines);
        outcome.passed &= sub.passed;
    }
    if config.bells.is_some() {
        let sub = cmd_bells(config, out)?;
        outcome.lines.extend(sub.lines);
        outcome.passed &= sub.passed;
    }
    if config.transform.is_some() {
        let sub = cmd_transform(config, out)?;
        outcome.lines.extend(sub.lines);
        outcome.passed &= sub.passed;
    }
    if config.verify.is_some() {
        let sub = cmd_verify(config, out)?;
        outcome.lines.extend(sub.lines);
        outcome.passed &= sub.passed;
    }
    if !config.jackson.is_empty() || !config.bernstein.is_empty() || !config.counting.is_empty() {
        let sub = cmd_approx(config, out)?;
        outcome.lines.extend(sub.lines);
        outcome.passed &= sub.passed;
    }
    Ok(outcome)
}
