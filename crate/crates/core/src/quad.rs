//! Matrix-valued adaptive Gauss-Kronrod quadrature over the real line,
//! specialized to the 6x6 Hermitian integrands of the output-covariance
//! integral: seeded panels, priority-queue refinement, and geometric tail
//! extension. Error control acts on the real part (the imaginary part
//! vanishes by the omega <-> -omega symmetry and is only tracked as a
//! convention diagnostic).

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use crate::CMat6;

/// 15-point Kronrod abscissae on [0, 1] side (QUADPACK dqk15), with the
/// embedded 7-point Gauss rule on the odd-indexed nodes.
const XGK: [f64; 8] = [
    0.991_455_371_120_812_639_206_854_697_526_329,
    0.949_107_912_342_758_524_526_189_684_047_851,
    0.864_864_423_359_769_072_789_712_788_640_926,
    0.741_531_185_599_394_439_863_864_773_280_788,
    0.586_087_235_467_691_130_294_144_838_258_730,
    0.405_845_151_377_397_166_906_606_412_076_961,
    0.207_784_955_007_898_467_600_689_403_773_245,
    0.000_000_000_000_000_000_000_000_000_000_000,
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
const WG: [f64; 4] = [
    0.129_484_966_168_869_693_270_611_432_679_082,
    0.279_705_391_489_276_667_901_467_771_423_780,
    0.381_830_050_505_118_944_950_369_775_488_975,
    0.417_959_183_673_469_387_755_102_040_816_327,
];

struct Panel {
    a: f64,
    b: f64,
    value: CMat6,
    error: f64,
}

impl PartialEq for Panel {
    fn eq(&self, other: &Self) -> bool {
        self.error == other.error
    }
}
impl Eq for Panel {}
impl PartialOrd for Panel {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Panel {
    fn cmp(&self, other: &Self) -> Ordering {
        self.error.total_cmp(&other.error)
    }
}

fn max_abs_re(m: &CMat6) -> f64 {
    m.iter().map(|z| z.re.abs()).fold(0.0, f64::max)
}

fn max_abs_im(m: &CMat6) -> f64 {
    m.iter().map(|z| z.im.abs()).fold(0.0, f64::max)
}

/// One Gauss-Kronrod 15-point evaluation on [a, b]; the error estimate is
/// the max-abs real-part deviation between the K15 and embedded G7 results.
fn gk15<F: Fn(f64) -> CMat6>(f: &F, a: f64, b: f64) -> Panel {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(center);
    let mut resk = fc * num_complex::Complex::new(WGK[7], 0.0);
    let mut resg = fc * num_complex::Complex::new(WG[3], 0.0);
    for j in 0..7 {
        let x = half * XGK[j];
        let f1 = f(center - x);
        let f2 = f(center + x);
        let fsum = f1 + f2;
        resk += fsum * num_complex::Complex::new(WGK[j], 0.0);
        if j % 2 == 1 {
            resg += fsum * num_complex::Complex::new(WG[j / 2], 0.0);
        }
    }
    let diff = resk - resg;
    let error = max_abs_re(&diff) * half.abs();
    Panel {
        a,
        b,
        value: resk * num_complex::Complex::new(half, 0.0),
        error,
    }
}

pub(crate) struct QuadOutcome {
    /// Raw integral (no 1/2pi); real part is the payload, imaginary part a
    /// symmetry diagnostic.
    pub total: CMat6,
    /// Sum of per-panel error estimates on the real part (raw units).
    pub error: f64,
    pub panels: usize,
    /// Final half-width of the covered window after tail extension.
    pub window: f64,
    pub converged: bool,
}

/// Integrate `f` over the real line: seeded panels between sorted
/// `breakpoints` spanning [-w0, w0], geometric tail extension in octaves
/// until a tail panel's real part contributes less than `abs_tol_raw`, then
/// worst-first refinement until the summed error estimate drops below
/// max(rel_tol * max|Re total|, abs_tol_raw) or the panel budget runs out.
pub(crate) fn integrate_line<F: Fn(f64) -> CMat6>(
    f: &F,
    breakpoints: &[f64],
    rel_tol: f64,
    abs_tol_raw: f64,
    max_panels: usize,
) -> QuadOutcome {
    let mut heap: BinaryHeap<Panel> = BinaryHeap::new();
    let mut total = CMat6::zeros();
    let mut err_sum = 0.0;
    let mut n_panels = 0usize;

    for pair in breakpoints.windows(2) {
        let (a, b) = (pair[0], pair[1]);
        if b - a <= 0.0 {
            continue;
        }
        let p = gk15(f, a, b);
        total += p.value;
        err_sum += p.error;
        n_panels += 1;
        heap.push(p);
    }

    // geometric tail extension, symmetric octaves
    let w0 = breakpoints.last().copied().unwrap_or(1.0);
    let mut side = w0;
    let mut window = w0;
    for _ in 0..64 {
        let hi = gk15(f, side, 2.0 * side);
        let lo = gk15(f, -2.0 * side, -side);
        let contribution = max_abs_re(&hi.value).max(max_abs_re(&lo.value));
        total += hi.value + lo.value;
        err_sum += hi.error + lo.error;
        n_panels += 2;
        heap.push(hi);
        heap.push(lo);
        window = 2.0 * side;
        if contribution < abs_tol_raw {
            break;
        }
        side *= 2.0;
    }

    // worst-first refinement
    while err_sum > (rel_tol * max_abs_re(&total)).max(abs_tol_raw) && n_panels < max_panels {
        let Some(worst) = heap.pop() else { break };
        if worst.error <= 0.0 {
            break;
        }
        let mid = 0.5 * (worst.a + worst.b);
        if mid <= worst.a || mid >= worst.b {
            // interval exhausted at f64 resolution
            heap.push(worst);
            break;
        }
        let left = gk15(f, worst.a, mid);
        let right = gk15(f, mid, worst.b);
        total += left.value + right.value - worst.value;
        err_sum += left.error + right.error - worst.error;
        n_panels += 2;
        heap.push(left);
        heap.push(right);
    }

    let converged = err_sum <= (rel_tol * max_abs_re(&total)).max(abs_tol_raw);
    QuadOutcome {
        total,
        error: err_sum,
        panels: n_panels,
        window,
        converged,
    }
}

pub(crate) fn imag_residual(total: &CMat6) -> f64 {
    max_abs_im(total)
}
