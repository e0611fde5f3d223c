//! Adaptive Gauss-Kronrod (7/15) quadrature.

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
const WG: [f64; 4] = [
    0.129_484_966_168_869_693_270_611_432_679_082,
    0.279_705_391_489_276_667_901_467_771_423_780,
    0.381_830_050_505_118_944_950_369_775_488_975,
    0.417_959_183_673_469_387_755_102_040_816_327,
];

const MAX_DEPTH: u32 = 60;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Integral {
    pub value: f64,
    /// Sum of local |Kronrod - Gauss| differences.
    pub error: f64,
}

fn kronrod<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> (f64, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut k = WGK[7] * fc;
    let mut g = WG[3] * fc;
    for j in 0..7 {
        let dx = h * XGK[j];
        let pair = f(c - dx) + f(c + dx);
        k += WGK[j] * pair;
        if j % 2 == 1 {
            g += WG[j / 2] * pair;
        }
    }
    (k * h, (k - g).abs() * h)
}

fn recurse<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, whole: (f64, f64), abs_tol: f64, rel_tol: f64, depth: u32) -> Integral {
    let (value, err) = whole;
    if err <= abs_tol.max(rel_tol * value.abs()) || depth >= MAX_DEPTH || !err.is_finite() {
        return Integral { value, error: err };
    }
    let m = 0.5 * (a + b);
    let left = kronrod(f, a, m);
    let right = kronrod(f, m, b);
    let l = recurse(f, a, m, left, 0.5 * abs_tol, rel_tol, depth + 1);
    let r = recurse(f, m, b, right, 0.5 * abs_tol, rel_tol, depth + 1);
    Integral { value: l.value + r.value, error: l.error + r.error }
}

/// Integrate `f` over the finite interval `[a, b]`, bisecting until each
/// piece meets `max(abs_tol, rel_tol * |piece|)`.
pub fn integrate<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, abs_tol: f64, rel_tol: f64) -> Integral {
    if a == b {
        return Integral { value: 0.0, error: 0.0 };
    }
    if b < a {
        let r = integrate(f, b, a, abs_tol, rel_tol);
        return Integral { value: -r.value, error: r.error };
    }
    let whole = kronrod(&f, a, b);
    recurse(&f, a, b, whole, abs_tol, rel_tol, 0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn polynomials_are_exact() {
        let r = integrate(|x| x.powi(7) - 3.0 * x * x, -1.0, 2.0, 1e-14, 0.0);
        assert_relative_eq!(r.value, (256.0 - 1.0) / 8.0 - (8.0 + 1.0), max_relative = 1e-14);
    }

    #[test]
    fn smooth_and_peaked() {
        let r = integrate(|x: f64| x.exp(), 0.0, 1.0, 1e-14, 1e-14);
        assert_relative_eq!(r.value, 1f64.exp() - 1.0, max_relative = 1e-14);
        let r = integrate(|x: f64| (-1e4 * (x - 0.3) * (x - 0.3)).exp(), 0.0, 1.0, 1e-14, 1e-13);
        assert_relative_eq!(r.value, (std::f64::consts::PI / 1e4).sqrt(), max_relative = 1e-10);
        let r = integrate(|x: f64| x, 1.0, 0.0, 1e-14, 0.0);
        assert_relative_eq!(r.value, -0.5);
    }
}
