//! Derivative-free minimization: Powell's direction-set method with Brent
//! line searches.

const GOLD: f64 = 1.618_033_988_749_895;
const CGOLD: f64 = 0.381_966_011_250_105;
const GLIMIT: f64 = 100.0;
const TINY: f64 = 1e-20;
const LINE_TOL: f64 = 1e-9;
const LINE_ZEPS: f64 = 1e-12;
const LINE_MAX_ITER: usize = 200;
/// Absolute slack in the decrease test, so objectives with a zero minimum can stop.
const F_FLOOR: f64 = 1e-20;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PowellOptions {
    pub max_evals: usize,
    pub rel_tol: f64,
    pub param_tol: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PowellResult {
    pub x: Vec<f64>,
    pub f: f64,
    pub iterations: usize,
    pub evaluations: usize,
    pub converged: bool,
    /// Best value at the start and after each sweep.
    pub history: Vec<f64>,
}

struct Counted<F> {
    f: F,
    evals: usize,
    max: usize,
}

impl<F: FnMut(&[f64]) -> f64> Counted<F> {
    /// Past the budget every point reads as infinitely bad, which ends the
    /// current line search without moving.
    fn call(&mut self, x: &[f64]) -> f64 {
        if self.evals >= self.max {
            return f64::INFINITY;
        }
        self.evals += 1;
        let v = (self.f)(x);
        if v.is_nan() {
            f64::INFINITY
        } else {
            v
        }
    }
}

fn along(x: &[f64], d: &[f64], a: f64) -> Vec<f64> {
    x.iter().zip(d).map(|(xi, di)| xi + a * di).collect()
}

/// Minimize `f` along `x + a d`. Returns `(a, f(x + a d))` for the best `a`
/// seen, which is `(0, fx)` if nothing beat the start.
fn line_min<F: FnMut(&[f64]) -> f64>(
    f: &mut Counted<F>,
    x: &[f64],
    fx: f64,
    d: &[f64],
) -> (f64, f64) {
    let mut g = |a: f64| {
        if a == 0.0 {
            fx
        } else {
            f.call(&along(x, d, a))
        }
    };

    // Bracket a minimum, starting from [0, 1].
    let (mut ax, mut bx) = (0.0, 1.0);
    let (mut fa, mut fb) = (fx, g(bx));
    if fb > fa {
        std::mem::swap(&mut ax, &mut bx);
        std::mem::swap(&mut fa, &mut fb);
    }
    let mut cx = bx + GOLD * (bx - ax);
    let mut fc = g(cx);
    let mut guard = 0;
    while fb > fc && guard < 100 {
        guard += 1;
        let r = (bx - ax) * (fb - fc);
        let q = (bx - cx) * (fb - fa);
        let denom = 2.0 * (q - r).abs().max(TINY).copysign(q - r);
        let mut u = bx - ((bx - cx) * q - (bx - ax) * r) / denom;
        let ulim = bx + GLIMIT * (cx - bx);
        let fu;
        if (bx - u) * (u - cx) > 0.0 {
            let fu1 = g(u);
            if fu1 < fc {
                ax = bx;
                fa = fb;
                bx = u;
                fb = fu1;
                break;
            } else if fu1 > fb {
                cx = u;
                fc = fu1;
                break;
            }
            u = cx + GOLD * (cx - bx);
            fu = g(u);
        } else if (cx - u) * (u - ulim) > 0.0 {
            let mut fu1 = g(u);
            if fu1 < fc {
                bx = cx;
                cx = u;
                u = cx + GOLD * (cx - bx);
                fb = fc;
                fc = fu1;
                fu1 = g(u);
            }
            fu = fu1;
        } else if (u - ulim) * (ulim - cx) >= 0.0 {
            u = ulim;
            fu = g(u);
        } else {
            u = cx + GOLD * (cx - bx);
            fu = g(u);
        }
        ax = bx;
        bx = cx;
        cx = u;
        fa = fb;
        fb = fc;
        fc = fu;
    }
    let _ = (fa, fc);

    // Brent's method on the bracket.
    let (mut a, mut b) = if ax < cx { (ax, cx) } else { (cx, ax) };
    let (mut xb, mut w, mut v) = (bx, bx, bx);
    let (mut fxb, mut fw, mut fv) = (fb, fb, fb);
    let mut e: f64 = 0.0;
    let mut dd: f64 = 0.0;
    for _ in 0..LINE_MAX_ITER {
        let xm = 0.5 * (a + b);
        let tol1 = LINE_TOL * xb.abs() + LINE_ZEPS;
        let tol2 = 2.0 * tol1;
        if (xb - xm).abs() <= tol2 - 0.5 * (b - a) {
            break;
        }
        if e.abs() > tol1 {
            let r = (xb - w) * (fxb - fv);
            let mut q = (xb - v) * (fxb - fw);
            let mut p = (xb - v) * q - (xb - w) * r;
            q = 2.0 * (q - r);
            if q > 0.0 {
                p = -p;
            }
            q = q.abs();
            let etemp = e;
            e = dd;
            if p.abs() >= (0.5 * q * etemp).abs() || p <= q * (a - xb) || p >= q * (b - xb) {
                e = if xb >= xm { a - xb } else { b - xb };
                dd = CGOLD * e;
            } else {
                dd = p / q;
                let u = xb + dd;
                if u - a < tol2 || b - u < tol2 {
                    dd = tol1.copysign(xm - xb);
                }
            }
        } else {
            e = if xb >= xm { a - xb } else { b - xb };
            dd = CGOLD * e;
        }
        let u = if dd.abs() >= tol1 {
            xb + dd
        } else {
            xb + tol1.copysign(dd)
        };
        let fu = g(u);
        if fu <= fxb {
            if u >= xb {
                a = xb;
            } else {
                b = xb;
            }
            v = w;
            w = xb;
            xb = u;
            fv = fw;
            fw = fxb;
            fxb = fu;
        } else {
            if u < xb {
                a = u;
            } else {
                b = u;
            }
            if fu <= fw || w == xb {
                v = w;
                w = u;
                fv = fw;
                fw = fu;
            } else if fu <= fv || v == xb || v == w {
                v = u;
                fv = fu;
            }
        }
    }
    if fxb < fx {
        (xb, fxb)
    } else {
        (0.0, fx)
    }
}

fn coordinate_directions(n: usize) -> Vec<Vec<f64>> {
    (0..n)
        .map(|i| {
            let mut d = vec![0.0; n];
            d[i] = 1.0;
            d
        })
        .collect()
}

/// Powell's method. `project` is applied to the iterate after every sweep
/// and kept only if it does not raise the objective.
///
/// A sweep that passes the stopping test with a modified direction set is
/// repeated from the coordinate directions before convergence is declared,
/// since the set can collapse onto a subspace.
pub fn powell<F, P>(f: F, x0: &[f64], opts: &PowellOptions, mut project: P) -> PowellResult
where
    F: FnMut(&[f64]) -> f64,
    P: FnMut(&mut [f64]),
{
    let n = x0.len();
    let mut f = Counted {
        f,
        evals: 0,
        max: opts.max_evals.max(1),
    };
    let mut dirs = coordinate_directions(n);
    let mut dirs_modified = false;
    let mut x = x0.to_vec();
    let mut fx = f.call(&x);
    let mut history = vec![fx];
    let mut iterations = 0;
    let mut converged = false;

    while f.evals < opts.max_evals {
        iterations += 1;
        let x_start = x.clone();
        let f_start = fx;
        let mut big_drop = 0.0;
        let mut big_idx = 0;
        for (i, d) in dirs.iter().enumerate() {
            let before = fx;
            let (a, fa) = line_min(&mut f, &x, fx, d);
            if a != 0.0 {
                x = along(&x, d, a);
                fx = fa;
            }
            if before - fx > big_drop {
                big_drop = before - fx;
                big_idx = i;
            }
        }

        let mut xp = x.clone();
        project(&mut xp);
        if xp != x {
            let fp = f.call(&xp);
            if fp <= fx {
                x = xp;
                fx = fp;
            }
        }
        history.push(fx);
        if f.evals >= opts.max_evals {
            break;
        }

        let disp = x
            .iter()
            .zip(&x_start)
            .map(|(a, b)| (a - b) * (a - b))
            .sum::<f64>()
            .sqrt();
        let small_drop =
            2.0 * (f_start - fx) <= opts.rel_tol * (f_start.abs() + fx.abs()) + F_FLOOR;
        if small_drop && disp < opts.param_tol {
            if !dirs_modified {
                converged = true;
                break;
            }
            dirs = coordinate_directions(n);
            dirs_modified = false;
            continue;
        }

        // Replace the direction of largest decrease with the net sweep
        // direction when the extrapolation test favours it.
        let d_net: Vec<f64> = x.iter().zip(&x_start).map(|(a, b)| a - b).collect();
        let xe: Vec<f64> = x.iter().zip(&d_net).map(|(a, d)| a + d).collect();
        let fe = f.call(&xe);
        if fe < f_start {
            let t = 2.0 * (f_start - 2.0 * fx + fe) * (f_start - fx - big_drop).powi(2)
                - big_drop * (f_start - fe).powi(2);
            if t < 0.0 {
                let (a, fa) = line_min(&mut f, &x, fx, &d_net);
                if a != 0.0 {
                    x = along(&x, &d_net, a);
                    fx = fa;
                    *history.last_mut().expect("non-empty") = fx;
                }
                dirs[big_idx] = dirs[n - 1].clone();
                dirs[n - 1] = d_net;
                dirs_modified = true;
            }
        }
    }

    PowellResult {
        x,
        f: fx,
        iterations,
        evaluations: f.evals,
        converged,
        history,
    }
}
