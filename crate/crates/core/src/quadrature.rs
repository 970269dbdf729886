//! Globally adaptive 15-point Gauss-Kronrod quadrature over finite intervals.
//!
//! The integrand returns a `(value, error)` pair so that nested integrals can
//! forward their own error estimate; the outer rule integrates those errors
//! with the Kronrod weights and adds them to the panel estimate.

use crate::exec::Execution;

const XGK: [f64; 8] = [
    0.991_455_371_120_812_639_206_854_697_526_329,
    0.949_107_912_342_758_524_526_189_684_047_851,
    0.864_864_423_359_769_072_789_712_788_640_926,
    0.741_531_185_599_394_439_863_864_773_280_788,
    0.586_087_235_467_691_130_294_144_845_693_013,
    0.405_845_151_377_397_166_906_606_412_076_961,
    0.207_784_955_007_898_467_600_689_403_773_245,
    0.0,
];

const WGK: [f64; 8] = [
    0.022_935_322_010_529_224_963_732_008_058_970,
    0.063_092_092_629_978_553_290_700_663_189_204,
    0.104_790_010_322_250_183_839_876_322_541_518,
    0.140_653_259_715_525_918_745_189_590_510_238,
    0.169_004_726_639_267_902_826_583_426_598_550,
    0.190_350_578_064_785_409_913_256_402_421_014,
    0.204_432_940_075_298_892_414_161_999_234_649,
    0.209_482_141_084_727_828_012_999_174_891_714,
];

// Weights of the embedded 7-point Gauss rule, matching XGK[1], XGK[3], XGK[5], XGK[7].
const WG: [f64; 4] = [
    0.129_484_966_168_869_693_270_611_432_679_082,
    0.279_705_391_489_276_667_901_467_771_423_780,
    0.381_830_050_505_118_944_950_369_775_488_975,
    0.417_959_183_673_469_387_755_102_040_816_327,
];

/// Stopping rule: the run converges once the total error estimate is below
/// `max(abs, rel·|I|, magnitude_rel·∫|f|)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerance {
    pub rel: f64,
    pub abs: f64,
    pub magnitude_rel: f64,
}

impl Tolerance {
    pub fn relative(rel: f64) -> Self {
        Self { rel, abs: 0.0, magnitude_rel: 0.0 }
    }

    pub fn with_abs(mut self, abs: f64) -> Self {
        self.abs = abs;
        self
    }

    pub fn with_magnitude_rel(mut self, magnitude_rel: f64) -> Self {
        self.magnitude_rel = magnitude_rel;
        self
    }

    fn target(&self, value: f64, magnitude: f64) -> f64 {
        self.abs
            .max(self.rel * value.abs())
            .max(self.magnitude_rel * magnitude)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Estimate {
    pub value: f64,
    pub error: f64,
    /// Integral of `|f|`, used for scale-aware tolerances.
    pub magnitude: f64,
    pub panels: usize,
    pub converged: bool,
}

#[derive(Debug, Clone, Copy)]
struct Panel {
    a: f64,
    b: f64,
    value: f64,
    error: f64,
    magnitude: f64,
}

fn rescale_error(err: f64, res_abs: f64, res_asc: f64) -> f64 {
    let mut scaled = err.abs();
    if res_asc != 0.0 && scaled != 0.0 {
        let scale = (200.0 * scaled / res_asc).powf(1.5);
        scaled = if scale < 1.0 { res_asc * scale } else { res_asc };
    }
    if res_abs > f64::MIN_POSITIVE / (50.0 * f64::EPSILON) {
        scaled = scaled.max(50.0 * f64::EPSILON * res_abs);
    }
    scaled
}

/// Abscissae of the 15-point rule on `[a, b]`, ordered as
/// `[center, c - h·x0, c + h·x0, c - h·x1, c + h·x1, ...]`.
fn nodes(a: f64, b: f64) -> [f64; 15] {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let mut out = [center; 15];
    for j in 0..7 {
        out[1 + 2 * j] = center - half * XGK[j];
        out[2 + 2 * j] = center + half * XGK[j];
    }
    out
}

fn apply_rule(a: f64, b: f64, f: &[(f64, f64); 15]) -> Panel {
    let half = 0.5 * (b - a);
    let abs_half = half.abs();
    let (fc, ec) = f[0];
    let mut kronrod = fc * WGK[7];
    let mut gauss = fc * WG[3];
    let mut res_abs = fc.abs() * WGK[7];
    let mut inherited = ec * WGK[7];
    for j in 0..7 {
        let (f1, e1) = f[1 + 2 * j];
        let (f2, e2) = f[2 + 2 * j];
        kronrod += WGK[j] * (f1 + f2);
        res_abs += WGK[j] * (f1.abs() + f2.abs());
        inherited += WGK[j] * (e1 + e2);
        if j % 2 == 1 {
            gauss += WG[j / 2] * (f1 + f2);
        }
    }
    let mean = 0.5 * kronrod;
    let mut res_asc = WGK[7] * (fc - mean).abs();
    for j in 0..7 {
        let (f1, _) = f[1 + 2 * j];
        let (f2, _) = f[2 + 2 * j];
        res_asc += WGK[j] * ((f1 - mean).abs() + (f2 - mean).abs());
    }
    let value = kronrod * half;
    let error = rescale_error((kronrod - gauss) * half, res_abs * abs_half, res_asc * abs_half)
        + inherited * abs_half;
    Panel { a, b, value, error, magnitude: res_abs * abs_half }
}

fn evaluate_panels<F>(f: &F, bounds: &[(f64, f64)], exec: Execution) -> Vec<Panel>
where
    F: Fn(f64) -> (f64, f64) + Sync,
{
    let xs: Vec<f64> = bounds.iter().flat_map(|&(a, b)| nodes(a, b)).collect();
    let fx = exec.map(&xs, |&x| f(x));
    bounds
        .iter()
        .zip(fx.chunks_exact(15))
        .map(|(&(a, b), chunk)| {
            let mut vals = [(0.0, 0.0); 15];
            vals.copy_from_slice(chunk);
            apply_rule(a, b, &vals)
        })
        .collect()
}

fn totals(panels: &[Panel]) -> (f64, f64, f64) {
    panels.iter().fold((0.0, 0.0, 0.0), |(v, e, m), p| {
        (v + p.value, e + p.error, m + p.magnitude)
    })
}

/// Integrates `f` over `[breakpoints[0], breakpoints[last]]`, seeding one
/// panel per consecutive pair of breakpoints and bisecting the panel with
/// the largest error until the tolerance is met or `max_panels` is reached.
///
/// Breakpoints must be finite and non-decreasing; empty panels are dropped.
pub fn integrate<F>(
    f: F,
    breakpoints: &[f64],
    tol: Tolerance,
    max_panels: usize,
    exec: Execution,
) -> Estimate
where
    F: Fn(f64) -> (f64, f64) + Sync,
{
    let seeds: Vec<(f64, f64)> = breakpoints
        .windows(2)
        .filter(|w| w[1] > w[0])
        .map(|w| (w[0], w[1]))
        .collect();
    if seeds.is_empty() {
        return Estimate { value: 0.0, error: 0.0, magnitude: 0.0, panels: 0, converged: true };
    }
    let mut panels = evaluate_panels(&f, &seeds, exec);
    let max_panels = max_panels.max(panels.len());
    // Panels too narrow to bisect are kept but never selected again.
    let mut frozen = vec![false; panels.len()];

    loop {
        let (value, error, magnitude) = totals(&panels);
        let target = tol.target(value, magnitude);
        if error <= target || panels.len() >= max_panels {
            return finish(panels, error <= target);
        }
        let worst = panels
            .iter()
            .enumerate()
            .filter(|(i, _)| !frozen[*i])
            .max_by(|(_, p), (_, q)| p.error.total_cmp(&q.error))
            .map(|(i, _)| i);
        let Some(i) = worst else {
            return finish(panels, false);
        };
        let Panel { a, b, .. } = panels[i];
        let mid = 0.5 * (a + b);
        if !(mid > a && mid < b) {
            frozen[i] = true;
            continue;
        }
        let children = evaluate_panels(&f, &[(a, mid), (mid, b)], exec);
        panels[i] = children[0];
        panels.push(children[1]);
        frozen.push(false);
    }
}

fn finish(mut panels: Vec<Panel>, converged: bool) -> Estimate {
    // Sum in abscissa order so the result does not depend on refinement history.
    panels.sort_by(|p, q| p.a.total_cmp(&q.a));
    let (value, error, magnitude) = totals(&panels);
    Estimate { value, error, magnitude, panels: panels.len(), converged }
}

/// Convenience wrapper for integrands without an inherited error.
pub fn integrate_plain<F>(
    f: F,
    breakpoints: &[f64],
    tol: Tolerance,
    max_panels: usize,
) -> Estimate
where
    F: Fn(f64) -> f64 + Sync,
{
    integrate(|x| (f(x), 0.0), breakpoints, tol, max_panels, Execution::Sequential)
}
