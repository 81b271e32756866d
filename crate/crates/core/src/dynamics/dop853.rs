//! Explicit 8(5,3) Dormand-Prince integrator for complex-valued systems.
//!
//! Steps are clamped so that every requested output time is hit exactly,
//! so no dense output is needed.

use num_complex::Complex64 as C64;

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Dop853Options {
    pub rtol: f64,
    pub atol: f64,
    /// First trial step; chosen from the initial derivative when `None`.
    pub h_init: Option<f64>,
    pub h_max: f64,
    pub max_steps: usize,
}

impl Default for Dop853Options {
    fn default() -> Self {
        Dop853Options {
            rtol: 1e-10,
            atol: 1e-12,
            h_init: None,
            h_max: f64::INFINITY,
            max_steps: 2_000_000,
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct Dop853Stats {
    pub accepted: usize,
    pub rejected: usize,
    pub evaluations: usize,
}

/// Integrates `dy/dt = f(t, y)` from `t0`, calling `on_output` at every time
/// in `t_out` (which must be non-decreasing and `>= t0`).
pub fn integrate<F, O>(
    mut f: F,
    t0: f64,
    y0: &[C64],
    t_out: &[f64],
    opts: &Dop853Options,
    mut on_output: O,
) -> Result<Dop853Stats>
where
    F: FnMut(f64, &[C64], &mut [C64]),
    O: FnMut(usize, f64, &[C64]) -> Result<()>,
{
    if t_out.windows(2).any(|w| w[1] < w[0]) || t_out.first().is_some_and(|&t| t < t0) {
        return Err(Error::invalid(
            "output times must be sorted and not before t0",
        ));
    }
    if !(opts.rtol > 0.0 && opts.atol >= 0.0) {
        return Err(Error::invalid("tolerances must be positive"));
    }
    let n = y0.len();
    let mut y = y0.to_vec();
    let mut t = t0;
    let mut stats = Dop853Stats::default();
    let mut k = vec![vec![C64::new(0.0, 0.0); n]; 12];
    let mut ytmp = vec![C64::new(0.0, 0.0); n];
    let mut ynew = vec![C64::new(0.0, 0.0); n];

    f(t, &y, &mut k[0]);
    stats.evaluations += 1;

    let t_end = t_out.last().copied().unwrap_or(t0);
    let mut h = match opts.h_init {
        Some(h) => h,
        None => initial_step(&y, &k[0], opts, t_end - t0),
    }
    .min(opts.h_max);
    let mut last_rejected = false;
    let mut next_out = 0;

    loop {
        while next_out < t_out.len() && t_out[next_out] <= t {
            on_output(next_out, t, &y)?;
            next_out += 1;
        }
        if next_out == t_out.len() {
            return Ok(stats);
        }
        if stats.accepted + stats.rejected >= opts.max_steps {
            return Err(Error::TooManySteps {
                steps: opts.max_steps,
                t,
            });
        }
        let target = t_out[next_out];
        let mut step = h.min(target - t);
        // avoid leaving a sliver before the target
        if target - t - step < 1e-9 * step {
            step = target - t;
        }
        let hit = step == target - t;
        if step < 1e-14 * t.abs().max(1.0) && !hit {
            return Err(Error::StepUnderflow { t, h: step });
        }

        let err = attempt(&mut f, t, &y, step, &mut k, &mut ytmp, &mut ynew, opts);
        stats.evaluations += 11;
        if !err.is_finite() {
            stats.rejected += 1;
            h = step * 0.1;
            last_rejected = true;
            if h < 1e-14 * t.abs().max(1.0) {
                return Err(Error::StepUnderflow { t, h });
            }
            continue;
        }
        let fac11 = err.powf(0.125);
        if err <= 1.0 {
            stats.accepted += 1;
            t = if hit { target } else { t + step };
            std::mem::swap(&mut y, &mut ynew);
            f(t, &y, &mut k[0]);
            stats.evaluations += 1;
            let fac = (fac11 / 0.9).clamp(1.0 / 6.0, 1.0 / 0.333);
            let mut hn = step / fac;
            if last_rejected {
                hn = hn.min(step);
            }
            // keep the controller's step rather than the clamped one
            h = if hit { hn.max(h) } else { hn }.min(opts.h_max);
            last_rejected = false;
        } else {
            stats.rejected += 1;
            h = step / (fac11 / 0.9).min(1.0 / 0.333);
            last_rejected = true;
            if h < 1e-14 * t.abs().max(1.0) {
                return Err(Error::StepUnderflow { t, h });
            }
        }
    }
}

fn initial_step(y: &[C64], dy: &[C64], opts: &Dop853Options, span: f64) -> f64 {
    let mut dnf = 0.0;
    let mut dny = 0.0;
    for (yi, fi) in y.iter().zip(dy) {
        let sk = opts.atol + opts.rtol * yi.norm();
        dnf += (fi.norm() / sk).powi(2);
        dny += (yi.norm() / sk).powi(2);
    }
    let h = if dnf <= 1e-10 || dny <= 1e-10 {
        1e-6
    } else {
        0.01 * (dny / dnf).sqrt()
    };
    if span > 0.0 {
        h.min(span)
    } else {
        h
    }
}

fn combo(out: &mut [C64], y: &[C64], h: f64, terms: &[(f64, &[C64])]) {
    for i in 0..out.len() {
        let mut acc = C64::new(0.0, 0.0);
        for (c, k) in terms {
            acc += *c * k[i];
        }
        out[i] = y[i] + h * acc;
    }
}

/// One trial step; returns the scaled error norm and leaves the solution in `ynew`.
#[allow(clippy::too_many_arguments)]
fn attempt<F>(
    f: &mut F,
    t: f64,
    y: &[C64],
    h: f64,
    k: &mut [Vec<C64>],
    ytmp: &mut [C64],
    ynew: &mut [C64],
    opts: &Dop853Options,
) -> f64
where
    F: FnMut(f64, &[C64], &mut [C64]),
{
    macro_rules! stage {
        ($idx:expr, $c:expr, [$(($a:expr, $j:expr)),*]) => {{
            {
                let terms: Vec<(f64, &[C64])> = vec![$(($a, &k[$j][..])),*];
                combo(ytmp, y, h, &terms);
            }
            f(t + $c * h, ytmp, &mut k[$idx]);
        }};
    }
    stage!(1, C2, [(A21, 0)]);
    stage!(2, C3, [(A31, 0), (A32, 1)]);
    stage!(3, C4, [(A41, 0), (A43, 2)]);
    stage!(4, C5, [(A51, 0), (A53, 2), (A54, 3)]);
    stage!(5, C6, [(A61, 0), (A64, 3), (A65, 4)]);
    stage!(6, C7, [(A71, 0), (A74, 3), (A75, 4), (A76, 5)]);
    stage!(7, C8, [(A81, 0), (A84, 3), (A85, 4), (A86, 5), (A87, 6)]);
    stage!(
        8,
        C9,
        [(A91, 0), (A94, 3), (A95, 4), (A96, 5), (A97, 6), (A98, 7)]
    );
    stage!(
        9,
        C10,
        [
            (A101, 0),
            (A104, 3),
            (A105, 4),
            (A106, 5),
            (A107, 6),
            (A108, 7),
            (A109, 8)
        ]
    );
    stage!(
        10,
        C11,
        [
            (A111, 0),
            (A114, 3),
            (A115, 4),
            (A116, 5),
            (A117, 6),
            (A118, 7),
            (A119, 8),
            (A1110, 9)
        ]
    );
    stage!(
        11,
        1.0,
        [
            (A121, 0),
            (A124, 3),
            (A125, 4),
            (A126, 5),
            (A127, 6),
            (A128, 7),
            (A129, 8),
            (A1210, 9),
            (A1211, 10)
        ]
    );

    let mut err = 0.0;
    let mut err2 = 0.0;
    for i in 0..y.len() {
        let bsum = B1 * k[0][i]
            + B6 * k[5][i]
            + B7 * k[6][i]
            + B8 * k[7][i]
            + B9 * k[8][i]
            + B10 * k[9][i]
            + B11 * k[10][i]
            + B12 * k[11][i];
        ynew[i] = y[i] + h * bsum;
        let sk = opts.atol + opts.rtol * y[i].norm().max(ynew[i].norm());
        let e2 = bsum - BHH1 * k[0][i] - BHH2 * k[8][i] - BHH3 * k[11][i];
        err2 += (e2.norm() / sk).powi(2);
        let e = ER1 * k[0][i]
            + ER6 * k[5][i]
            + ER7 * k[6][i]
            + ER8 * k[7][i]
            + ER9 * k[8][i]
            + ER10 * k[9][i]
            + ER11 * k[10][i]
            + ER12 * k[11][i];
        err += (e.norm() / sk).powi(2);
    }
    let mut deno = err + 0.01 * err2;
    if deno <= 0.0 {
        deno = 1.0;
    }
    h.abs() * err * (1.0 / (y.len() as f64 * deno)).sqrt()
}

const A21: f64 = 5.26001519587677318785587544488E-2;
const A31: f64 = 1.97250569845378994544595329183E-2;
const A32: f64 = 5.91751709536136983633785987549E-2;
const A41: f64 = 2.95875854768068491816892993775E-2;
const A43: f64 = 8.87627564304205475450678981324E-2;
const A51: f64 = 2.41365134159266685502369798665E-1;
const A53: f64 = -8.84549479328286085344864962717E-1;
const A54: f64 = 9.24834003261792003115737966543E-1;
const A61: f64 = 3.7037037037037037037037037037E-2;
const A64: f64 = 1.70828608729473871279604482173E-1;
const A65: f64 = 1.25467687566822425016691814123E-1;
const A71: f64 = 3.7109375E-2;
const A74: f64 = 1.70252211019544039314978060272E-1;
const A75: f64 = 6.02165389804559606850219397283E-2;
const A76: f64 = -1.7578125E-2;
const A81: f64 = 3.70920001185047927108779319836E-2;
const A84: f64 = 1.70383925712239993810214054705E-1;
const A85: f64 = 1.07262030446373284651809199168E-1;
const A86: f64 = -1.53194377486244017527936158236E-2;
const A87: f64 = 8.27378916381402288758473766002E-3;
const A91: f64 = 6.24110958716075717114429577812E-1;
const A94: f64 = -3.36089262944694129406857109825E0;
const A95: f64 = -8.68219346841726006818189891453E-1;
const A96: f64 = 2.75920996994467083049415600797E1;
const A97: f64 = 2.01540675504778934086186788979E1;
const A98: f64 = -4.34898841810699588477366255144E1;
const A101: f64 = 4.77662536438264365890433908527E-1;
const A104: f64 = -2.48811461997166764192642586468E0;
const A105: f64 = -5.90290826836842996371446475743E-1;
const A106: f64 = 2.12300514481811942347288949897E1;
const A107: f64 = 1.52792336328824235832596922938E1;
const A108: f64 = -3.32882109689848629194453265587E1;
const A109: f64 = -2.03312017085086261358222928593E-2;
const A111: f64 = -9.3714243008598732571704021658E-1;
const A114: f64 = 5.18637242884406370830023853209E0;
const A115: f64 = 1.09143734899672957818500254654E0;
const A116: f64 = -8.14978701074692612513997267357E0;
const A117: f64 = -1.85200656599969598641566180701E1;
const A118: f64 = 2.27394870993505042818970056734E1;
const A119: f64 = 2.49360555267965238987089396762E0;
const A1110: f64 = -3.0467644718982195003823669022E0;
const A121: f64 = 2.27331014751653820792359768449E0;
const A124: f64 = -1.05344954667372501984066689879E1;
const A125: f64 = -2.00087205822486249909675718444E0;
const A126: f64 = -1.79589318631187989172765950534E1;
const A127: f64 = 2.79488845294199600508499808837E1;
const A128: f64 = -2.85899827713502369474065508674E0;
const A129: f64 = -8.87285693353062954433549289258E0;
const A1210: f64 = 1.23605671757943030647266201528E1;
const A1211: f64 = 6.43392746015763530355970484046E-1;

const B1: f64 = 5.42937341165687622380535766363E-2;
const B6: f64 = 4.45031289275240888144113950566E0;
const B7: f64 = 1.89151789931450038304281599044E0;
const B8: f64 = -5.8012039600105847814672114227E0;
const B9: f64 = 3.1116436695781989440891606237E-1;
const B10: f64 = -1.52160949662516078556178806805E-1;
const B11: f64 = 2.01365400804030348374776537501E-1;
const B12: f64 = 4.47106157277725905176885569043E-2;

const BHH1: f64 = 0.244094488188976377952755905512E+00;
const BHH2: f64 = 0.733846688281611857341361741547E+00;
const BHH3: f64 = 0.220588235294117647058823529412E-01;

const C2: f64 = 0.526001519587677318785587544488E-01;
const C3: f64 = 0.789002279381515978178381316732E-01;
const C4: f64 = 0.118350341907227396726757197510E+00;
const C5: f64 = 0.281649658092772603273242802490E+00;
const C6: f64 = 0.333333333333333333333333333333E+00;
const C7: f64 = 0.25E+00;
const C8: f64 = 0.307692307692307692307692307692E+00;
const C9: f64 = 0.651282051282051282051282051282E+00;
const C10: f64 = 0.6E+00;
const C11: f64 = 0.857142857142857142857142857142E+00;

const ER1: f64 = 0.1312004499419488073250102996E-01;
const ER6: f64 = -0.1225156446376204440720569753E+01;
const ER7: f64 = -0.4957589496572501915214079952E+00;
const ER8: f64 = 0.1664377182454986536961530415E+01;
const ER9: f64 = -0.3503288487499736816886487290E+00;
const ER10: f64 = 0.3341791187130174790297318841E+00;
const ER11: f64 = 0.8192320648511571246570742613E-01;
const ER12: f64 = -0.2235530786388629525884427845E-01;

#[cfg(test)]
mod tests {
    use super::*;

    const I: C64 = C64 { re: 0.0, im: 1.0 };

    #[test]
    fn exponential_decay_and_rotation() {
        let lam = C64::new(-0.3, 2.0);
        let times: Vec<f64> = (0..=10).map(|i| i as f64 * 0.7).collect();
        let mut worst: f64 = 0.0;
        integrate(
            |_, y, dy| dy[0] = lam * y[0],
            0.0,
            &[C64::new(1.0, 0.0)],
            &times,
            &Dop853Options::default(),
            |_, t, y| {
                worst = worst.max((y[0] - (lam * t).exp()).norm());
                Ok(())
            },
        )
        .unwrap();
        assert!(worst < 1e-9, "{worst}");
    }

    #[test]
    fn outputs_hit_requested_times() {
        let times = [0.0, 0.1, 0.1, 0.35, 2.0];
        let mut seen = Vec::new();
        integrate(
            |_, y, dy| dy[0] = -I * y[0],
            0.0,
            &[C64::new(1.0, 0.0)],
            &times,
            &Dop853Options::default(),
            |i, t, _| {
                seen.push((i, t));
                Ok(())
            },
        )
        .unwrap();
        assert_eq!(seen.len(), times.len());
        for (i, t) in seen {
            assert_eq!(t, times[i]);
        }
    }

    #[test]
    fn time_dependent_rhs() {
        // dy/dt = i t y  ->  y = exp(i t^2 / 2)
        let mut last = C64::new(0.0, 0.0);
        integrate(
            |t, y, dy| dy[0] = I * t * y[0],
            0.0,
            &[C64::new(1.0, 0.0)],
            &[5.0],
            &Dop853Options::default(),
            |_, _, y| {
                last = y[0];
                Ok(())
            },
        )
        .unwrap();
        assert!((last - (I * 12.5).exp()).norm() < 1e-8);
    }

    #[test]
    fn step_limit_reported() {
        let opts = Dop853Options {
            max_steps: 3,
            h_init: Some(1e-3),
            h_max: 1e-3,
            ..Default::default()
        };
        let r = integrate(
            |_, y, dy| dy[0] = y[0],
            0.0,
            &[C64::new(1.0, 0.0)],
            &[1.0],
            &opts,
            |_, _, _| Ok(()),
        );
        assert!(matches!(r, Err(Error::TooManySteps { .. })));
    }

    #[test]
    fn unsorted_times_rejected() {
        let r = integrate(
            |_, y, dy| dy[0] = y[0],
            0.0,
            &[C64::new(1.0, 0.0)],
            &[1.0, 0.5],
            &Dop853Options::default(),
            |_, _, _| Ok(()),
        );
        assert!(r.is_err());
    }
}
