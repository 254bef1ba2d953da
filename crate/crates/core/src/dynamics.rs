//! Hybrid trajectories: exact free flight off the torus, event location on
//! `h = 0`, and projected integration of the sliding field on it.

use std::f64::consts::TAU;

use serde::{Deserialize, Serialize};

use crate::fields::{is_inelastic, region_from_lie};
use crate::{
    Error, LinearField, PiecewiseSystem, Point, RegionKind, Result, TorusSpec, EPS_SIGN,
    EPS_SURFACE,
};

/// Bisection stops once the bracket is shorter than this.
const EVENT_TIME_TOL: f64 = 1e-12;
/// `|h|` at a local minimum below which a non-crossing approach is a grazing contact.
const GRAZING_TOL: f64 = 1e-10;
/// Sliding step bound is `SLIDE_STEP_SCALE / |ω|`.
const SLIDE_STEP_SCALE: f64 = 1e-3;
/// Hard cap on the number of segments in one [`simulate`] run.
const MAX_SEGMENTS: usize = 256;

const CLOSURE_GAP_TOL: f64 = 1e-6;
const CLOSURE_PERIOD_TOL: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Mode {
    FreeFlightExterior,
    FreeFlightInterior,
    Sliding,
}

impl Mode {
    /// Short label used in trajectory exports.
    pub fn label(&self) -> &'static str {
        match self {
            Mode::FreeFlightExterior => "free+",
            Mode::FreeFlightInterior => "free-",
            Mode::Sliding => "slide",
        }
    }

    fn side(&self) -> f64 {
        match self {
            Mode::FreeFlightExterior => 1.0,
            Mode::FreeFlightInterior => -1.0,
            Mode::Sliding => 0.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum TerminalEvent {
    ReachedTmax,
    HitSurface,
    DegenerateStop,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum SegmentFlag {
    /// The segment started at an escaping point, where forward motion is not
    /// unique; the sliding extension was followed.
    NonDeterministicEscape,
    /// The free flight ended touching the torus without crossing it.
    Grazing,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrajectorySegment {
    pub mode: Mode,
    pub t_start: f64,
    pub t_end: f64,
    pub samples: Vec<(f64, Point)>,
    pub terminal_event: TerminalEvent,
    #[serde(default)]
    pub flags: Vec<SegmentFlag>,
}

impl TrajectorySegment {
    fn single(mode: Mode, t: f64, p: Point, event: TerminalEvent) -> Self {
        Self {
            mode,
            t_start: t,
            t_end: t,
            samples: vec![(t, p)],
            terminal_event: event,
            flags: Vec::new(),
        }
    }

    pub fn first_point(&self) -> Point {
        self.samples[0].1
    }

    pub fn last_point(&self) -> Point {
        self.samples[self.samples.len() - 1].1
    }

    pub fn duration(&self) -> f64 {
        self.t_end - self.t_start
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trajectory {
    pub segments: Vec<TrajectorySegment>,
    pub system: PiecewiseSystem,
}

impl Trajectory {
    pub fn end_time(&self) -> f64 {
        self.segments.last().map_or(0.0, |s| s.t_end)
    }

    pub fn last_point(&self) -> Option<Point> {
        self.segments.last().map(TrajectorySegment::last_point)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OrbitClosure {
    pub closed: bool,
    pub measured_period: f64,
    pub return_gap: f64,
}

/// Sampling step for event bracketing along `exp(M t)`.
fn event_step(m: &crate::Matrix) -> f64 {
    let norm = m.norm();
    if norm == 0.0 {
        0.01
    } else {
        (0.1 / norm).min(0.01)
    }
}

/// Free flight of `x` from `x0`, on the side of the torus given by the sign
/// of `h(x0)`. From a point on the torus the side is the one the field
/// departs into.
pub fn free_flight(x: &LinearField, x0: &Point, t_max: f64, torus: &TorusSpec) -> TrajectorySegment {
    let side = departure_side(x, x0, torus);
    let mode = if side >= 0.0 {
        Mode::FreeFlightExterior
    } else {
        Mode::FreeFlightInterior
    };
    flight(x, x0, 0.0, t_max.max(0.0), torus, mode)
}

fn departure_side(x: &LinearField, x0: &Point, torus: &TorusSpec) -> f64 {
    let h = torus.h_value(x0);
    if h.abs() >= EPS_SURFACE {
        return h.signum();
    }
    for d in x.lie_tower(torus).iter().map(|d| d.eval(x0)) {
        if d.abs() > EPS_SIGN {
            return d.signum();
        }
    }
    1.0
}

fn flight(
    x: &LinearField,
    x0: &Point,
    t0: f64,
    duration: f64,
    torus: &TorusSpec,
    mode: Mode,
) -> TrajectorySegment {
    let m = *x.matrix();
    let at = |t: f64| (m * t).exp() * x0;
    let s = mode.side();
    let signed_h = |t: f64| s * torus.h_value(&at(t));

    if duration <= 0.0 {
        return TrajectorySegment::single(mode, t0, *x0, TerminalEvent::ReachedTmax);
    }

    let dt = event_step(&m);
    let steps = (duration / dt).ceil().max(1.0) as usize;
    let dt = duration / steps as f64;
    let starts_on_surface = torus.h_value(x0).abs() < EPS_SURFACE;

    let mut samples = vec![(t0, *x0)];
    let mut prev = (0.0, signed_h(0.0));
    let mut before_prev: Option<(f64, f64)> = None;

    let finish = |mut samples: Vec<(f64, Point)>, t: f64, event, flags| {
        let p = at(t);
        samples.push((t0 + t, p));
        TrajectorySegment {
            mode,
            t_start: t0,
            t_end: t0 + t,
            samples,
            terminal_event: event,
            flags,
        }
    };

    for k in 1..=steps {
        let t = if k == steps { duration } else { k as f64 * dt };
        let g = signed_h(t);
        if g <= 0.0 {
            if k == 1 && starts_on_surface {
                return TrajectorySegment::single(mode, t0, *x0, TerminalEvent::HitSurface);
            }
            let root = bisect(&signed_h, prev.0, t);
            return finish(samples, root, TerminalEvent::HitSurface, Vec::new());
        }
        if let Some(bp) = before_prev {
            if prev.1 < bp.1 && prev.1 < g && !(k == 2 && starts_on_surface) {
                let (t_min, g_min) = golden_min(&signed_h, bp.0, t);
                if g_min < -GRAZING_TOL {
                    let root = bisect(&signed_h, bp.0, t_min);
                    return finish(samples, root, TerminalEvent::HitSurface, Vec::new());
                }
                if g_min < GRAZING_TOL {
                    return finish(
                        samples,
                        t_min,
                        TerminalEvent::HitSurface,
                        vec![SegmentFlag::Grazing],
                    );
                }
            }
        }
        if k < steps {
            samples.push((t0 + t, at(t)));
        }
        before_prev = Some(prev);
        prev = (t, g);
    }
    finish(samples, duration, TerminalEvent::ReachedTmax, Vec::new())
}

/// First sign change of `f` in `[lo, hi]` with `f(lo) > 0 ≥ f(hi)`.
fn bisect<F: Fn(f64) -> f64>(f: &F, mut lo: f64, mut hi: f64) -> f64 {
    while hi - lo > EVENT_TIME_TOL {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if f(mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    hi
}

fn golden_min<F: Fn(f64) -> f64>(f: &F, mut a: f64, mut b: f64) -> (f64, f64) {
    let ratio = 0.5 * (5f64.sqrt() - 1.0);
    let mut c = b - ratio * (b - a);
    let mut d = a + ratio * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    while b - a > EVENT_TIME_TOL {
        if fc < -GRAZING_TOL {
            return (c, fc);
        }
        if fd < -GRAZING_TOL {
            return (d, fd);
        }
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - ratio * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + ratio * (b - a);
            fd = f(d);
        }
    }
    let t = 0.5 * (a + b);
    (t, f(t))
}

fn rk4_step(m: &crate::Matrix, p: &Point, dt: f64) -> Point {
    let k1 = m * p;
    let k2 = m * (p + k1 * (dt / 2.0));
    let k3 = m * (p + k2 * (dt / 2.0));
    let k4 = m * (p + k3 * dt);
    p + (k1 + k2 * 2.0 + k3 * 2.0 + k4) * (dt / 6.0)
}

fn require_inelastic_on_surface(sys: &PiecewiseSystem, p: &Point) -> Result<()> {
    if !is_inelastic(sys) {
        return Err(Error::NotInelastic);
    }
    let residual = sys.torus.h_value(p).abs();
    if residual >= EPS_SURFACE {
        return Err(Error::NotOnSurface { residual });
    }
    Ok(())
}

/// Sliding motion from `p0` on the torus for `t_max`, integrating
/// `½(X₊ + X₋)` by RK4 with a Newton projection after every step.
pub fn slide_flow(sys: &PiecewiseSystem, p0: &Point, t_max: f64) -> Result<TrajectorySegment> {
    require_inelastic_on_surface(sys, p0)?;
    Ok(slide(sys, p0, 0.0, t_max.max(0.0)))
}

fn slide_steps(omega: f64, duration: f64) -> usize {
    (duration * omega.abs() / SLIDE_STEP_SCALE).ceil().max(1.0) as usize
}

fn slide(sys: &PiecewiseSystem, p0: &Point, t0: f64, duration: f64) -> TrajectorySegment {
    let omega = sys.omega();
    if omega.abs() <= crate::sliding::OMEGA_EPS {
        return TrajectorySegment::single(Mode::Sliding, t0, *p0, TerminalEvent::DegenerateStop);
    }
    if duration <= 0.0 {
        return TrajectorySegment::single(Mode::Sliding, t0, *p0, TerminalEvent::ReachedTmax);
    }
    let m = sys.mean_matrix();
    let steps = slide_steps(omega, duration);
    let dt = duration / steps as f64;
    let mut samples = Vec::with_capacity(steps + 1);
    let mut p = *p0;
    samples.push((t0, p));
    for k in 1..=steps {
        p = sys.torus.project(&rk4_step(&m, &p, dt));
        let t = if k == steps { t0 + duration } else { t0 + k as f64 * dt };
        samples.push((t, p));
    }
    TrajectorySegment {
        mode: Mode::Sliding,
        t_start: t0,
        t_end: t0 + duration,
        samples,
        terminal_event: TerminalEvent::ReachedTmax,
        flags: Vec::new(),
    }
}

/// Hybrid trajectory of an inelastic system from `x0` up to `t_max`.
///
/// Free flight continues until the torus is reached; the contact point is
/// then classified. Sliding points slide until `t_max`. Escaping points slide
/// too, with [`SegmentFlag::NonDeterministicEscape`] on the segment. At a
/// tangency the trajectory leaves in the free-flight mode whose second Lie
/// derivative points away from the torus, and slides if neither does.
pub fn simulate(sys: &PiecewiseSystem, x0: &Point, t_max: f64) -> Result<Trajectory> {
    if !is_inelastic(sys) {
        return Err(Error::NotInelastic);
    }
    let t_max = t_max.max(0.0);
    let torus = sys.torus;
    let mut segments: Vec<TrajectorySegment> = Vec::new();
    let mut t = 0.0;
    let mut p = *x0;

    if torus.h_value(&p).abs() >= EPS_SURFACE || t_max == 0.0 {
        let h = torus.h_value(&p);
        let (field, mode) = if h >= 0.0 {
            (&sys.exterior, Mode::FreeFlightExterior)
        } else {
            (&sys.interior, Mode::FreeFlightInterior)
        };
        let mode = if h.abs() < EPS_SURFACE { Mode::Sliding } else { mode };
        if mode == Mode::Sliding {
            segments.push(TrajectorySegment::single(mode, 0.0, p, TerminalEvent::ReachedTmax));
            return Ok(Trajectory { segments, system: *sys });
        }
        let seg = flight(field, &p, 0.0, t_max, &torus, mode);
        let done = seg.terminal_event == TerminalEvent::ReachedTmax;
        t = seg.t_end;
        p = seg.last_point();
        segments.push(seg);
        if done {
            return Ok(Trajectory { segments, system: *sys });
        }
    }

    loop {
        p = torus.project(&p);
        let remaining = (t_max - t).max(0.0);
        let region = region_from_lie(sys.exterior_lie(&p), sys.interior_lie(&p));
        let departure = match region {
            RegionKind::Crossing => {
                return Err(Error::CrossingOnInelastic {
                    point: [p.x, p.y, p.z],
                })
            }
            RegionKind::Sliding | RegionKind::Escaping => None,
            RegionKind::Tangency if segments.len() >= MAX_SEGMENTS => None,
            RegionKind::Tangency => fold_departure(sys, &p),
        };
        let Some(mode) = departure else {
            let mut seg = slide(sys, &p, t, remaining);
            if region == RegionKind::Escaping {
                seg.flags.push(SegmentFlag::NonDeterministicEscape);
            }
            segments.push(seg);
            break;
        };
        let field = if mode == Mode::FreeFlightExterior {
            &sys.exterior
        } else {
            &sys.interior
        };
        let seg = flight(field, &p, t, remaining, &torus, mode);
        if seg.duration() <= 0.0 && seg.terminal_event == TerminalEvent::HitSurface {
            segments.push(slide(sys, &p, t, remaining));
            break;
        }
        let done = seg.terminal_event == TerminalEvent::ReachedTmax;
        t = seg.t_end;
        p = seg.last_point();
        segments.push(seg);
        if done {
            break;
        }
    }
    Ok(Trajectory {
        segments,
        system: *sys,
    })
}

/// The free-flight mode leaving the torus from a tangency point, if any.
fn fold_departure(sys: &PiecewiseSystem, p: &Point) -> Option<Mode> {
    let plus = sys.exterior.lie_tower(&sys.torus)[1].eval(p);
    if plus > EPS_SIGN {
        return Some(Mode::FreeFlightExterior);
    }
    let minus = sys.interior.lie_tower(&sys.torus)[1].eval(p);
    if minus < -EPS_SIGN {
        return Some(Mode::FreeFlightInterior);
    }
    None
}

/// Slides from `p0` until the polar angle has advanced by a full turn and
/// compares the return time and point with the closed-orbit prediction.
pub fn orbit_closure_check(sys: &PiecewiseSystem, p0: &Point) -> Result<OrbitClosure> {
    require_inelastic_on_surface(sys, p0)?;
    let omega = sys.omega();
    if omega.abs() <= crate::sliding::OMEGA_EPS {
        return Err(Error::DegenerateOmega);
    }
    let predicted = TAU / omega.abs();
    let m = sys.mean_matrix();
    let dt = predicted / slide_steps(omega, predicted) as f64;
    let step = |p: &Point, dt: f64| sys.torus.project(&rk4_step(&m, p, dt));
    let angle = |p: &Point| p.y.atan2(p.x);
    let advance = |from: &Point, to: &Point| {
        let d = angle(to) - angle(from);
        d - TAU * (d / TAU).round()
    };

    let mut p = *p0;
    let mut t = 0.0;
    let mut turned = 0.0;
    let limit = 2.0 * predicted;
    while t < limit {
        let q = step(&p, dt);
        let dq = advance(&p, &q);
        if (turned + dq).abs() >= TAU {
            // refine the final step length so the turn is exactly 2π
            let target = TAU - turned.abs();
            let (mut lo, mut hi) = (0.0, dt);
            for _ in 0..80 {
                let mid = 0.5 * (lo + hi);
                if advance(&p, &step(&p, mid)).abs() < target {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            let h = 0.5 * (lo + hi);
            let end = step(&p, h);
            let measured_period = t + h;
            let return_gap = (end - p0).norm();
            let period_error = (measured_period - predicted).abs() / predicted;
            return Ok(OrbitClosure {
                closed: return_gap < CLOSURE_GAP_TOL && period_error < CLOSURE_PERIOD_TOL,
                measured_period,
                return_gap,
            });
        }
        turned += dq;
        p = q;
        t += dt;
    }
    Ok(OrbitClosure {
        closed: false,
        measured_period: f64::INFINITY,
        return_gap: (p - p0).norm(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::Matrix;
    use std::f64::consts::PI;

    fn spiral() -> PiecewiseSystem {
        let a = Matrix::new(-1.0, -4.0, 0.0, 4.0, -1.0, 0.0, 0.0, 0.0, -1.0);
        PiecewiseSystem::inelastic(a, 0.0, TorusSpec::canonical())
    }

    fn rotation(a21: f64, b21: f64) -> PiecewiseSystem {
        let a = Matrix::new(0.0, -a21, 1.0, a21, 0.0, 0.0, 0.0, 0.0, 0.0);
        PiecewiseSystem::inelastic(a, b21, TorusSpec::canonical())
    }

    #[test]
    fn free_flight_event_on_contraction() {
        let t = TorusSpec::canonical();
        let seg = free_flight(&LinearField(-Matrix::identity()), &Point::new(4.0, 0.0, 0.0), 1.0, &t);
        assert_eq!(seg.terminal_event, TerminalEvent::HitSurface);
        assert_eq!(seg.mode, Mode::FreeFlightExterior);
        assert!((seg.t_end - (4.0f64 / 3.0).ln()).abs() < 1e-11);
        assert!((seg.last_point() - Point::new(3.0, 0.0, 0.0)).norm() < 1e-10);
        assert!(t.h_value(&seg.last_point()).abs() < 1e-9);
    }

    #[test]
    fn free_flight_on_level_orbit_reaches_tmax() {
        let t = TorusSpec::canonical();
        let rot = Matrix::new(0.0, -1.0, 0.0, 1.0, 0.0, 0.0, 0.0, 0.0, 0.0);
        let seg = free_flight(&LinearField(rot), &Point::new(4.0, 0.0, 0.0), 10.0, &t);
        assert_eq!(seg.terminal_event, TerminalEvent::ReachedTmax);
        assert_eq!(seg.t_end, 10.0);
        for (_, p) in &seg.samples {
            assert!((t.h_value(p) - 105.0).abs() < 1e-9);
        }
    }

    #[test]
    fn free_flight_with_zero_horizon() {
        let seg = free_flight(&LinearField(Matrix::identity()), &Point::new(0.0, 0.0, 5.0), 0.0, &TorusSpec::canonical());
        assert_eq!(seg.samples.len(), 1);
        assert_eq!(seg.t_end, 0.0);
    }

    #[test]
    fn grazing_approach_is_detected() {
        // Horizontal flight at height z = 1 touches the torus top at (2, 0, 1).
        let t = TorusSpec::canonical();
        let m = Matrix::new(0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0);
        let shift = Matrix::new(0.0, 0.0, 1.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0);
        // x' = z with z ≡ 1 gives x(t) = x0 + t
        let seg = free_flight(&LinearField(m + shift), &Point::new(1.0031, 0.0, 1.0), 2.0, &t);
        assert_eq!(seg.terminal_event, TerminalEvent::HitSurface);
        assert!(seg.flags.contains(&SegmentFlag::Grazing));
        assert!((seg.t_end - 0.9969).abs() < 1e-5);
    }

    #[test]
    fn slide_flow_examples() {
        let sys = rotation(4.0, 0.0);
        let p0 = Point::new(3.0, 0.0, 0.0);
        let full = slide_flow(&sys, &p0, PI).unwrap();
        assert!((full.last_point() - p0).norm() < 1e-6);
        let half = slide_flow(&sys, &p0, PI / 2.0).unwrap();
        assert!((half.last_point() - Point::new(-3.0, 0.0, 0.0)).norm() < 1e-6);
        for (_, p) in &full.samples {
            assert!(sys.torus.h_value(p).abs() < 1e-9);
        }
        let still = slide_flow(&rotation(4.0, -4.0), &p0, 1.0).unwrap();
        assert_eq!(still.terminal_event, TerminalEvent::DegenerateStop);
        assert_eq!(still.t_end, 0.0);
    }

    #[test]
    fn spiral_fixture() {
        let traj = simulate(&spiral(), &Point::new(4.0, 0.0, 0.0), 3.0).unwrap();
        assert_eq!(traj.segments.len(), 2);
        let (free, slide) = (&traj.segments[0], &traj.segments[1]);
        assert_eq!(free.mode, Mode::FreeFlightExterior);
        assert_eq!(slide.mode, Mode::Sliding);
        let t_hit = (4.0f64 / 3.0).ln();
        assert!((free.t_end - t_hit).abs() < 1e-9);
        let q = free.last_point();
        assert!((q.x.hypot(q.y) - 3.0).abs() < 1e-9);
        assert!(q.z.abs() < 1e-9);
        assert!((q.y.atan2(q.x) - 4.0 * t_hit).abs() < 1e-9);
        assert!((slide.first_point() - q).norm() < 1e-9);
        assert_eq!(slide.t_end, 3.0);
    }

    #[test]
    fn simulate_zero_horizon() {
        let traj = simulate(&spiral(), &Point::new(4.0, 0.0, 0.0), 0.0).unwrap();
        assert_eq!(traj.segments.len(), 1);
        assert_eq!(traj.segments[0].samples.len(), 1);
    }

    #[test]
    fn closure_examples() {
        let c = orbit_closure_check(&rotation(4.0, -1.0), &Point::new(2.5, 0.0, -(3f64.sqrt()) / 2.0)).unwrap();
        assert!(c.closed);
        assert!((c.measured_period - 4.0 * PI / 3.0).abs() < 1e-9);
        let c = orbit_closure_check(&rotation(-0.25, -0.25), &Point::new(0.0, 1.0, 0.0)).unwrap();
        assert!(c.closed);
        assert!((c.measured_period - 8.0 * PI).abs() < 1e-8);
        assert_eq!(
            orbit_closure_check(&rotation(4.0, -4.0), &Point::new(3.0, 0.0, 0.0)),
            Err(Error::DegenerateOmega)
        );
    }
}
