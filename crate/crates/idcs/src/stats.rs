//! Scalar Gaussian toolkit: error function, normal interval probabilities,
//! and streaming moment accumulation.
//!
//! Everything in the crate that talks about confidence reduces to one
//! question — *how much probability mass does a Gaussian put inside a
//! symmetric interval?* — so the answer has to be cheap and accurate over
//! the whole range we can encounter, including provider profiles with
//! near-zero variance. The error function below is a Rust port of the
//! FreeBSD libm `erf` (the same rational-approximation scheme used by the
//! Go standard library), accurate to within about 1 ulp over each of its
//! argument ranges. We deliberately avoid the naive series/continued
//! fraction: provider σ values from real indicator data span three orders
//! of magnitude and push `z` into regions where those lose digits.

// The ported polynomial coefficients keep their upstream 21-digit decimal
// renderings so they can be diffed against the originals, even though f64
// rounds the tails away.
#![allow(clippy::excessive_precision)]

/// Variances below this are treated as exactly degenerate: the Gaussian
/// collapses to a point mass at its mean and interval probabilities become
/// 0/1 indicators. Composed variances of calibrated profiles sit many
/// orders of magnitude above this, so the cutoff only fires for genuinely
/// constant error streams (for example, a simulated provider that always
/// reports the truth).
pub const DEGENERATE_VARIANCE: f64 = 1e-12;

// ---------------------------------------------------------------------------
// erf: FreeBSD libm port
// ---------------------------------------------------------------------------

const ERX: f64 = 8.450_629_115_104_675_292_97e-01; // erf(0.84375), split point

// |x| < 0.84375: erf(x) = x + x*R(x^2), R = P/Q
const EFX: f64 = 1.283_791_670_955_125_863_16e-01; // erf(x)/x - 1 at 0
const EFX8: f64 = 1.027_033_336_764_100_690_53e+00; // 8*(erf(x)/x - 1)
const PP0: f64 = 1.283_791_670_955_125_585_61e-01;
const PP1: f64 = -3.250_421_072_470_014_993_70e-01;
const PP2: f64 = -2.848_174_957_559_851_047_66e-02;
const PP3: f64 = -5.770_270_296_489_441_591_57e-03;
const PP4: f64 = -2.376_301_665_665_016_260_84e-05;
const QQ1: f64 = 3.979_172_239_591_553_528_19e-01;
const QQ2: f64 = 6.502_224_998_876_729_444_85e-02;
const QQ3: f64 = 5.081_306_281_875_765_627_76e-03;
const QQ4: f64 = 1.324_947_380_043_216_445_26e-04;
const QQ5: f64 = -3.960_228_278_775_368_123_20e-06;

// 0.84375 <= |x| < 1.25: erf(x) = erx + P(s)/Q(s), s = |x| - 1
const PA0: f64 = -2.362_118_560_752_659_440_77e-03;
const PA1: f64 = 4.148_561_186_837_483_316_66e-01;
const PA2: f64 = -3.722_078_760_357_013_238_47e-01;
const PA3: f64 = 3.183_466_199_011_617_536_74e-01;
const PA4: f64 = -1.108_946_942_823_966_774_76e-01;
const PA5: f64 = 3.547_830_432_561_823_593_71e-02;
const PA6: f64 = -2.166_375_594_868_790_843_00e-03;
const QA1: f64 = 1.064_208_804_008_442_282_86e-01;
const QA2: f64 = 5.403_979_177_021_710_489_37e-01;
const QA3: f64 = 7.182_865_441_419_626_628_68e-02;
const QA4: f64 = 1.261_712_198_087_616_421_12e-01;
const QA5: f64 = 1.363_708_391_202_905_073_62e-02;
const QA6: f64 = 1.198_449_984_679_910_741_70e-02;

// 1.25 <= |x| < 1/0.35: log(erfc(x)) ~ -x^2 - 0.5625 + R(s)/S(s), s = 1/x^2
const RA0: f64 = -9.864_944_034_847_148_227_05e-03;
const RA1: f64 = -6.938_585_727_071_817_643_72e-01;
const RA2: f64 = -1.055_862_622_532_329_098_14e+01;
const RA3: f64 = -6.237_533_245_032_600_603_96e+01;
const RA4: f64 = -1.623_966_694_625_734_703_55e+02;
const RA5: f64 = -1.846_050_929_067_110_359_94e+02;
const RA6: f64 = -8.128_743_550_630_659_342_46e+01;
const RA7: f64 = -9.814_329_344_169_145_485_92e+00;
const SA1: f64 = 1.965_127_166_743_925_712_92e+01;
const SA2: f64 = 1.376_577_541_435_190_426_00e+02;
const SA3: f64 = 4.345_658_774_752_292_288_21e+02;
const SA4: f64 = 6.453_872_717_332_678_803_36e+02;
const SA5: f64 = 4.290_081_400_275_678_333_86e+02;
const SA6: f64 = 1.086_350_055_417_794_351_34e+02;
const SA7: f64 = 6.570_249_770_319_281_701_35e+00;
const SA8: f64 = -6.042_441_521_485_809_874_38e-02;

// 1/0.35 <= |x| < 6: same shape, different fit
const RB0: f64 = -9.864_942_924_700_099_285_97e-03;
const RB1: f64 = -7.992_832_376_805_230_065_74e-01;
const RB2: f64 = -1.775_795_491_775_475_198_89e+01;
const RB3: f64 = -1.606_363_848_558_219_160_62e+02;
const RB4: f64 = -6.375_664_433_683_896_277_22e+02;
const RB5: f64 = -1.025_095_131_611_077_249_54e+03;
const RB6: f64 = -4.835_191_916_086_513_970_19e+02;
const SB1: f64 = 3.033_806_074_348_245_829_24e+01;
const SB2: f64 = 3.257_925_129_965_739_188_26e+02;
const SB3: f64 = 1.536_729_586_084_436_959_94e+03;
const SB4: f64 = 3.199_858_219_508_595_539_08e+03;
const SB5: f64 = 2.553_050_406_433_164_425_83e+03;
const SB6: f64 = 4.745_285_412_069_553_672_15e+02;
const SB7: f64 = -2.244_095_244_658_581_833_62e+01;

const VERY_TINY: f64 = 2.848_094_538_889_218e-306; // 0x0080000000000000
const SMALL: f64 = 1.0 / ((1u64 << 28) as f64); // 2^-28

/// Error function `erf(x) = 2/sqrt(pi) * integral of exp(-t^2) from 0 to x`.
///
/// Port of the FreeBSD libm implementation; see the module docs for why we
/// carry our own rather than approximate.
pub fn erf(x: f64) -> f64 {
    if x.is_nan() {
        return f64::NAN;
    }
    if x == f64::INFINITY {
        return 1.0;
    }
    if x == f64::NEG_INFINITY {
        return -1.0;
    }
    let sign = x < 0.0;
    let x = x.abs();

    if x < 0.84375 {
        // erf(x) = x + x*R(x^2)
        let temp = if x < SMALL {
            if x < VERY_TINY {
                // Avoid spurious underflow in x*EFX.
                0.125 * (8.0 * x + EFX8 * x)
            } else {
                x + EFX * x
            }
        } else {
            let z = x * x;
            let r = PP0 + z * (PP1 + z * (PP2 + z * (PP3 + z * PP4)));
            let s = 1.0 + z * (QQ1 + z * (QQ2 + z * (QQ3 + z * (QQ4 + z * QQ5))));
            let y = r / s;
            x + x * y
        };
        return if sign { -temp } else { temp };
    }

    if x < 1.25 {
        let s = x - 1.0;
        let p = PA0 + s * (PA1 + s * (PA2 + s * (PA3 + s * (PA4 + s * (PA5 + s * PA6)))));
        let q = 1.0 + s * (QA1 + s * (QA2 + s * (QA3 + s * (QA4 + s * (QA5 + s * QA6)))));
        let temp = ERX + p / q;
        return if sign { -temp } else { temp };
    }

    if x >= 6.0 {
        // erfc(6) < 2^-75: saturate, keeping the result strictly inside ±1.
        return if sign { VERY_TINY - 1.0 } else { 1.0 - VERY_TINY };
    }

    // 1.25 <= x < 6: erf(x) = 1 - erfc(x), erfc via exp(-x^2 - 0.5625 + R/S)/x.
    let s = 1.0 / (x * x);
    let (r, big_s) = if x < 1.0 / 0.35 {
        (
            RA0 + s * (RA1 + s * (RA2 + s * (RA3 + s * (RA4 + s * (RA5 + s * (RA6 + s * RA7)))))),
            1.0 + s
                * (SA1
                    + s * (SA2
                        + s * (SA3 + s * (SA4 + s * (SA5 + s * (SA6 + s * (SA7 + s * SA8))))))),
        )
    } else {
        (
            RB0 + s * (RB1 + s * (RB2 + s * (RB3 + s * (RB4 + s * (RB5 + s * RB6))))),
            1.0 + s * (SB1 + s * (SB2 + s * (SB3 + s * (SB4 + s * (SB5 + s * (SB6 + s * SB7)))))),
        )
    };
    // Split x into a pseudo single-precision head so that z*z is exact;
    // the tail is corrected through exp((z-x)*(z+x)).
    let z = f64::from_bits(x.to_bits() & 0xffff_ffff_0000_0000);
    let r = f64::exp(-z * z - 0.5625) * f64::exp((z - x) * (z + x) + r / big_s);
    if sign {
        r / x - 1.0
    } else {
        1.0 - r / x
    }
}

/// Standard normal CDF `Φ(z)`.
pub fn standard_normal_cdf(z: f64) -> f64 {
    0.5 * (1.0 + erf(z / std::f64::consts::SQRT_2))
}

// ---------------------------------------------------------------------------
// Gaussian
// ---------------------------------------------------------------------------

/// A univariate Gaussian, parameterized by mean and **variance** (not
/// standard deviation — composition formulas work in variance space, and
/// keeping one convention avoids silent unit bugs).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Gaussian {
    pub mean: f64,
    pub variance: f64,
}

impl Gaussian {
    pub fn new(mean: f64, variance: f64) -> Self {
        debug_assert!(variance >= 0.0, "variance must be non-negative");
        Gaussian { mean, variance }
    }

    pub fn std_dev(&self) -> f64 {
        self.variance.sqrt()
    }

    /// Probability that a draw lands strictly inside `(-tolerance, tolerance)`.
    ///
    /// This is the crate's notion of "being good enough": applied to a
    /// provider's error distribution it scores the provider, applied to a
    /// composed consensus error it is the confidence level of the estimate.
    ///
    /// A degenerate Gaussian (variance below [`DEGENERATE_VARIANCE`])
    /// contributes an indicator: 1 if its mean is inside the interval,
    /// else 0. Without the cutoff the z-scores would overflow to ±inf and
    /// the subtraction below would return NaN for a distribution whose
    /// answer is obvious.
    pub fn interval_prob(&self, tolerance: f64) -> f64 {
        debug_assert!(tolerance > 0.0, "tolerance must be positive");
        if self.variance < DEGENERATE_VARIANCE {
            return if self.mean.abs() < tolerance { 1.0 } else { 0.0 };
        }
        let scale = self.std_dev() * std::f64::consts::SQRT_2;
        // Φ((t-μ)/σ) - Φ((-t-μ)/σ), written as an erf difference so the two
        // halves share the scaling and cancellation stays benign.
        0.5 * (erf((tolerance - self.mean) / scale) - erf((-tolerance - self.mean) / scale))
    }
}

// ---------------------------------------------------------------------------
// Streaming moments
// ---------------------------------------------------------------------------

/// Welford's online algorithm for count, mean, and variance.
///
/// Provider error profiles are updated one trade at a time over an
/// unbounded history, so the textbook two-pass estimator is out and naive
/// sum-of-squares accumulation loses digits once the mean dwarfs the
/// spread. Welford keeps the running second central moment `m2` directly.
///
/// ```
/// use idcs::stats::OnlineMoments;
///
/// let mut m = OnlineMoments::new();
/// for x in [2.0, 4.0, 6.0] {
///     m.push(x);
/// }
/// assert_eq!(m.count(), 3);
/// assert!((m.mean() - 4.0).abs() < 1e-15);
/// assert!((m.variance() - 8.0 / 3.0).abs() < 1e-15);
/// ```
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct OnlineMoments {
    count: u64,
    mean: f64,
    m2: f64,
}

impl OnlineMoments {
    pub fn new() -> Self {
        Self::default()
    }

    /// Rebuild an accumulator from persisted `(count, mean, variance)`.
    ///
    /// Inverse of the accessors: round-tripping through storage and back
    /// yields an accumulator that continues exactly where it left off.
    pub fn from_parts(count: u64, mean: f64, variance: f64) -> Self {
        OnlineMoments {
            count,
            mean,
            m2: variance * count as f64,
        }
    }

    pub fn push(&mut self, x: f64) {
        self.count += 1;
        let delta = x - self.mean;
        self.mean += delta / self.count as f64;
        let delta2 = x - self.mean;
        self.m2 += delta * delta2;
    }

    pub fn count(&self) -> u64 {
        self.count
    }

    /// Running mean; 0 for an empty accumulator.
    pub fn mean(&self) -> f64 {
        self.mean
    }

    /// Population variance `m2 / count`; 0 for an empty accumulator.
    ///
    /// Population rather than sample: the profile *is* the model we score
    /// providers with, not an estimate of some larger hidden sample, and a
    /// single-observation profile must yield variance 0 instead of NaN.
    pub fn variance(&self) -> f64 {
        if self.count == 0 {
            0.0
        } else {
            self.m2 / self.count as f64
        }
    }

    /// The fitted error distribution: `G(mean, variance)`.
    pub fn to_gaussian(&self) -> Gaussian {
        Gaussian::new(self.mean, self.variance())
    }
}
