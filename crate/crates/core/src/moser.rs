//! Moser path method for folded forms with a common critical set, and
//! Z-preserving isotopies with the associated homotopy operator.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::bm::{convex_path, CriticalSet, FoldedVolumeForm};
use crate::error::{Error, Result};
use crate::exec::{self, ExecMode};
use crate::forms::{d1, DiscreteMap, OneForm, TwoForm, VectorField, MIN_CONTRACTION_ORDER};
use crate::invariants::regional_volumes;
use crate::numerics::{lagrange, wrapped_offset, QUOTIENT_BAND, QUOTIENT_NODES};
use crate::primitive::{build_primitive_with, verify_primitive, PrimitiveOneForm, PrimitiveReport};
use crate::separable::SeparableField;
use crate::spectral::{Axis, SpectralField2D};

/// Largest displacement of a seed point in one integration step.
pub const MAX_STEP_DISPLACEMENT: f64 = 0.25;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MoserConfig {
    pub steps: usize,
    pub grid: usize,
    /// Sets the number of circle samples (`4K` per circle).
    pub bandwidth: usize,
    pub pullback_tol: f64,
    pub fixing_tol: f64,
    /// Tolerance on the regional volume defects.
    pub volume_tol: f64,
    #[serde(skip)]
    pub exec: ExecMode,
}

impl Default for MoserConfig {
    fn default() -> Self {
        Self {
            steps: 200,
            grid: 256,
            bandwidth: 64,
            pullback_tol: 1e-4,
            fixing_tol: 1e-8,
            volume_tol: 1e-8,
            exec: ExecMode::default(),
        }
    }
}

/// Hypothesis-checked Moser problem `Ω_s = (1-s)Ω0 + sΩ1`, `dβ = Ω0 - Ω1`.
pub struct MoserProblem {
    omega0: FoldedVolumeForm,
    omega1: FoldedVolumeForm,
    dw: SeparableField,
    primitive: PrimitiveOneForm,
    report: PrimitiveReport,
}

impl MoserProblem {
    pub fn new(omega0: &FoldedVolumeForm, omega1: &FoldedVolumeForm, volume_tol: f64) -> Result<Self> {
        let z = omega0.critical();
        if !z.same_geometry(omega1.critical()) {
            return Err(Error::Incomparable("forms have different critical sets".into()));
        }
        let v0 = regional_volumes(omega0).volumes;
        let v1 = regional_volumes(omega1).volumes;
        let defects: Vec<f64> = v0.iter().zip(&v1).map(|(a, b)| b - a).collect();
        if defects.iter().any(|d| d.abs() > volume_tol) {
            return Err(Error::Obstruction { defects });
        }
        convex_path(omega0, omega1, 0.5)?;
        let delta = omega0.density().sub(omega1.density());
        let primitive = build_primitive_with(&delta, z, volume_tol, crate::primitive::DEFAULT_FLATNESS)?;
        let report = verify_primitive(&primitive, &delta, z);
        if let Some((i, o)) = report.orders.iter().enumerate().find(|(_, o)| **o < MIN_CONTRACTION_ORDER) {
            return Err(Error::IllPosedContraction(format!("primitive vanishes to order {o:.3} at circle {i}")));
        }
        Ok(Self {
            omega0: omega0.clone(),
            omega1: omega1.clone(),
            dw: omega1.density().sub(omega0.density()),
            primitive,
            report,
        })
    }

    pub fn critical(&self) -> &CriticalSet {
        self.omega0.critical()
    }

    pub fn primitive(&self) -> &PrimitiveOneForm {
        &self.primitive
    }

    pub fn primitive_report(&self) -> &PrimitiveReport {
        &self.report
    }

    pub fn omega0(&self) -> &FoldedVolumeForm {
        &self.omega0
    }

    pub fn omega1(&self) -> &FoldedVolumeForm {
        &self.omega1
    }

    /// Density of `Ω_s`.
    pub fn density_at(&self, s: f64, x: f64, y: f64) -> f64 {
        self.omega0.density().eval(x, y) + s * self.dw.eval(x, y)
    }

    /// `v_s` with `ι_{v_s} Ω_s = β`.
    pub fn field(&self, s: f64, x: f64, y: f64) -> [f64; 2] {
        self.state(s, x, y).0
    }

    /// Velocity and divergence at a point away from the circles. From
    /// `div(w v) = w0 - w1` one gets `div v = (w0 - w1 - v·∇w) / w`.
    fn direct_state(&self, s: f64, x: f64, y: f64) -> ([f64; 2], f64) {
        let g0 = self.omega0.density().eval_grad(x, y);
        let g1 = self.dw.eval_grad(x, y);
        let w = g0[0] + s * g1[0];
        let (wx, wy) = (g0[1] + s * g1[1], g0[2] + s * g1[2]);
        let [a, b] = self.primitive.eval(x, y);
        let v = [b / w, -a / w];
        (v, (-g1[0] - v[0] * wx - v[1] * wy) / w)
    }

    /// Velocity `v_s` and `div v_s`. Inside the quotient band both come from
    /// interpolation through nodes off the circle; `v_s` is exactly zero on it.
    pub fn state(&self, s: f64, x: f64, y: f64) -> ([f64; 2], f64) {
        if self.primitive.is_zero() {
            return ([0.0, 0.0], 0.0);
        }
        let z = self.critical();
        let (i, t) = z.nearest(x);
        if t.abs() >= QUOTIENT_BAND {
            return self.direct_state(s, x, y);
        }
        let c = z.position(i);
        let nodes = QUOTIENT_NODES.map(|k| k * QUOTIENT_BAND);
        let mut vx = [0.0; 6];
        let mut vy = [0.0; 6];
        let mut dv = [0.0; 6];
        for (j, &tau) in nodes.iter().enumerate() {
            let (v, d) = self.direct_state(s, c + tau, y);
            vx[j] = v[0] / tau;
            vy[j] = v[1] / tau;
            dv[j] = d;
        }
        ([t * lagrange(&nodes, &vx, t), t * lagrange(&nodes, &vy, t)], lagrange(&nodes, &dv, t))
    }

    pub fn moser_field(&self, s: f64) -> MoserField<'_> {
        MoserField { problem: self, s }
    }

    /// RK4 for the position and `log det Dφ_s`, which obeys
    /// `d/ds log det = div v_s`.
    fn rk4(
        &self,
        start: (f64, f64),
        steps: usize,
        mut monitor: impl FnMut(usize, (f64, f64)),
    ) -> Result<((f64, f64), f64)> {
        let h = 1.0 / steps as f64;
        let (mut x, mut y) = start;
        let mut logdet = 0.0;
        for k in 0..steps {
            let s = k as f64 * h;
            let (k1, d1) = self.state(s, x, y);
            let (k2, d2) = self.state(s + 0.5 * h, x + 0.5 * h * k1[0], y + 0.5 * h * k1[1]);
            let (k3, d3) = self.state(s + 0.5 * h, x + 0.5 * h * k2[0], y + 0.5 * h * k2[1]);
            let (k4, d4) = self.state(s + h, x + h * k3[0], y + h * k3[1]);
            let dx = h / 6.0 * (k1[0] + 2.0 * k2[0] + 2.0 * k3[0] + k4[0]);
            let dy = h / 6.0 * (k1[1] + 2.0 * k2[1] + 2.0 * k3[1] + k4[1]);
            let dl = h / 6.0 * (d1 + 2.0 * d2 + 2.0 * d3 + d4);
            if !dx.is_finite() || !dy.is_finite() || !dl.is_finite() {
                return Err(Error::Integration(format!(
                    "nonfinite velocity at s={s:.4} from seed ({:.4}, {:.4})",
                    start.0, start.1
                )));
            }
            if dx.abs().max(dy.abs()) > MAX_STEP_DISPLACEMENT {
                return Err(Error::Integration(format!(
                    "step displacement {:.3e} exceeds {MAX_STEP_DISPLACEMENT} at s={s:.4}",
                    dx.abs().max(dy.abs())
                )));
            }
            x += dx;
            y += dy;
            logdet += dl;
            monitor(k + 1, (x, y));
        }
        Ok(((x, y), logdet))
    }
}

/// `v_s` at a fixed path parameter.
pub struct MoserField<'a> {
    problem: &'a MoserProblem,
    s: f64,
}

impl MoserField<'_> {
    pub fn eval(&self, x: f64, y: f64) -> [f64; 2] {
        self.problem.field(self.s, x, y)
    }
}

/// Seeds placed on the critical circles, `4K` per circle.
pub fn circle_seeds(z: &CriticalSet, bandwidth: usize) -> Vec<(f64, f64)> {
    let n = 4 * bandwidth.max(1);
    z.circles().iter().flat_map(|&c| (0..n).map(move |k| (c, k as f64 / n as f64))).collect()
}

pub struct FlowOutput {
    pub map: DiscreteMap,
    /// `log det Dφ` at each grid seed, carried along the trajectory.
    pub log_jacobian: Vec<f64>,
    pub circle_seeds: Vec<(f64, f64)>,
    pub circle_images: Vec<(f64, f64)>,
    /// Largest distance from the circle seen at `s = k/10` along circle seeds.
    pub trajectory_drift: f64,
}

/// Fourth-order Runge-Kutta flow of `v_s` from `s = 0` to `1` for every grid
/// seed and every circle seed.
pub fn integrate_flow(problem: &MoserProblem, cfg: &MoserConfig) -> Result<FlowOutput> {
    let n = cfg.grid;
    let seeds_z = circle_seeds(problem.critical(), cfg.bandwidth);
    let total = n * n + seeds_z.len();
    let check_every = (cfg.steps / 10).max(1);
    let results = exec::try_map_indices(total, cfg.exec, |i| -> Result<([f64; 3], f64)> {
        if i < n * n {
            let p = ((i % n) as f64 / n as f64, (i / n) as f64 / n as f64);
            let (q, l) = problem.rk4(p, cfg.steps, |_, _| {})?;
            Ok(([q.0 - p.0, q.1 - p.1, l], 0.0))
        } else {
            let p = seeds_z[i - n * n];
            let mut drift: f64 = 0.0;
            let (q, l) = problem.rk4(p, cfg.steps, |k, q| {
                if k % check_every == 0 {
                    drift = drift.max(wrapped_offset(q.0, p.0).abs());
                }
            })?;
            Ok(([q.0 - p.0, q.1 - p.1, l], drift))
        }
    })?;
    let grid = &results[..n * n];
    let map = DiscreteMap::new(n, grid.iter().map(|r| r.0[0]).collect(), grid.iter().map(|r| r.0[1]).collect())?;
    let circle_images = seeds_z.iter().zip(&results[n * n..]).map(|(p, r)| (p.0 + r.0[0], p.1 + r.0[1])).collect();
    let trajectory_drift = results[n * n..].iter().fold(0.0_f64, |m, r| m.max(r.1));
    Ok(FlowOutput {
        map,
        log_jacobian: grid.iter().map(|r| r.0[2]).collect(),
        circle_seeds: seeds_z,
        circle_images,
        trajectory_drift,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FlowCertificate {
    /// `sup |w1(φ(p))·det Dφ(p) - w0(p)| / sup |w0|` on the grid, with the
    /// Jacobian carried along each trajectory.
    pub pullback_error: f64,
    /// The same with `det Dφ` from finite differences of the grid map.
    pub grid_pullback_error: f64,
    /// `max |φ(p) - p|` over circle samples.
    pub fixing_error: f64,
    pub trajectory_drift: f64,
    /// Smallest trajectory Jacobian determinant.
    pub min_jacobian: f64,
    /// Smallest finite-difference Jacobian determinant of the grid map.
    pub grid_min_jacobian: f64,
    pub primitive_residual: f64,
    pub primitive_orders: Vec<f64>,
    pub steps: usize,
    pub grid: usize,
    pub circle_samples: usize,
    pub pullback_tol: f64,
    pub fixing_tol: f64,
    pub passed: bool,
}

pub fn certify_flow(problem: &MoserProblem, flow: &FlowOutput, cfg: &MoserConfig) -> FlowCertificate {
    let map = &flow.map;
    let n = map.resolution();
    let fd_dets = map.jacobian_dets(cfg.exec);
    let w0 = problem.omega0.density();
    let w1 = problem.omega1.density();
    let errs = exec::map_indices(n * n, cfg.exec, |i| {
        let (x, y) = map.grid_point(i);
        let (fx, fy) = map.image(i);
        let a = w0.eval(x, y);
        let b = w1.eval(fx, fy);
        let det = flow.log_jacobian[i].exp();
        [(b * det - a).abs(), (b * fd_dets[i] - a).abs(), a.abs(), det]
    });
    let fold = |k: usize| errs.iter().fold(0.0_f64, |m, e| m.max(e[k]));
    let scale = fold(2);
    let rel = |v: f64| if scale > 0.0 { v / scale } else { v };
    let pullback_error = rel(fold(0));
    let grid_pullback_error = rel(fold(1));
    let min_jacobian = errs.iter().map(|e| e[3]).fold(f64::INFINITY, f64::min);
    let grid_min_jacobian = fd_dets.iter().copied().fold(f64::INFINITY, f64::min);
    let fixing_error = flow
        .circle_seeds
        .iter()
        .zip(&flow.circle_images)
        .map(|(p, q)| (q.0 - p.0).hypot(q.1 - p.1))
        .fold(0.0_f64, f64::max);
    let passed = pullback_error <= cfg.pullback_tol && fixing_error <= cfg.fixing_tol && min_jacobian > 0.0;
    FlowCertificate {
        pullback_error,
        grid_pullback_error,
        fixing_error,
        trajectory_drift: flow.trajectory_drift,
        min_jacobian,
        grid_min_jacobian,
        primitive_residual: problem.report.residual,
        primitive_orders: problem.report.orders.clone(),
        steps: cfg.steps,
        grid: n,
        circle_samples: flow.circle_seeds.len(),
        pullback_tol: cfg.pullback_tol,
        fixing_tol: cfg.fixing_tol,
        passed,
    }
}

pub struct MoserOutcome {
    pub map: DiscreteMap,
    pub certificate: FlowCertificate,
}

/// Obstruction check, primitive, flow and certificate. The certificate
/// records whether the run passed its thresholds.
pub fn run_moser(omega0: &FoldedVolumeForm, omega1: &FoldedVolumeForm, cfg: &MoserConfig) -> Result<MoserOutcome> {
    let problem = MoserProblem::new(omega0, omega1, cfg.volume_tol)?;
    let flow = integrate_flow(&problem, cfg)?;
    let certificate = certify_flow(&problem, &flow, cfg);
    Ok(MoserOutcome { map: flow.map, certificate })
}

/// [`run_moser`] that turns a failed certificate into an error.
pub fn run_moser_checked(
    omega0: &FoldedVolumeForm,
    omega1: &FoldedVolumeForm,
    cfg: &MoserConfig,
) -> Result<MoserOutcome> {
    let out = run_moser(omega0, omega1, cfg)?;
    if !out.certificate.passed {
        let c = &out.certificate;
        return Err(Error::CertificateFailure(format!(
            "pullback error {:.3e} (tol {:.1e}), fixing error {:.3e} (tol {:.1e}), min Jacobian {:.3e}",
            c.pullback_error, c.pullback_tol, c.fixing_error, c.fixing_tol, c.min_jacobian
        )));
    }
    Ok(out)
}

/// Time-one flow of an autonomous field tangent to the critical circles.
#[derive(Clone, Debug)]
pub struct ZIsotopy {
    pub generator: VectorField,
    pub map: DiscreteMap,
    pub steps: usize,
    gradient: [SpectralField2D; 4],
}

const ISOTOPY_BANDWIDTH: usize = 8;
const ISOTOPY_MODES: i32 = 2;
pub const ISOTOPY_STEPS: usize = 20;

/// `Π sin(π(x - c_i))` over pairs of circles, with a `sin(2π(x - c))`
/// factor for an unpaired circle; band-limited and zero on every circle.
fn circle_product(z: &CriticalSet) -> SpectralField2D {
    let bw = ISOTOPY_BANDWIDTH;
    let mut acc = SpectralField2D::constant(bw, 1.0);
    let c = z.circles();
    let mut i = 0;
    while i + 1 < c.len() {
        let (a, b) = (c[i], c[i + 1]);
        let phase = std::f64::consts::PI * (a + b);
        let factor = SpectralField2D::constant(bw, 0.5 * (std::f64::consts::PI * (a - b)).cos())
            .add(&SpectralField2D::cos(bw, 1, 0, -0.5 * phase.cos()))
            .add(&SpectralField2D::sin(bw, 1, 0, -0.5 * phase.sin()));
        acc = acc.multiply(&factor);
        i += 2;
    }
    if i < c.len() {
        let phase = std::f64::consts::TAU * c[i];
        let factor = SpectralField2D::sin(bw, 1, 0, phase.cos()).add(&SpectralField2D::cos(bw, 1, 0, -phase.sin()));
        acc = acc.multiply(&factor);
    }
    acc
}

fn random_field(rng: &mut ChaCha8Rng) -> SpectralField2D {
    let mut modes = Vec::new();
    for kx in 0..=ISOTOPY_MODES {
        for ky in -ISOTOPY_MODES..=ISOTOPY_MODES {
            if kx == 0 && ky < 0 {
                continue;
            }
            let re: f64 = rng.gen_range(-1.0..1.0);
            let im: f64 = if kx == 0 && ky == 0 { 0.0 } else { rng.gen_range(-1.0..1.0) };
            let c = if kx == 0 && ky == 0 { Complex64::new(re, 0.0) } else { Complex64::new(re, im) * 0.5 };
            modes.push((kx, ky, c));
        }
    }
    SpectralField2D::from_modes(ISOTOPY_BANDWIDTH, &modes).expect("symmetric modes")
}

fn sup_sampled(f: &SpectralField2D) -> f64 {
    let m = 64;
    f.grid_samples(m).iter().fold(0.0_f64, |a, v| a.max(v.abs()))
}

impl ZIsotopy {
    pub fn from_generator(generator: VectorField, grid: usize, steps: usize, mode: ExecMode) -> Result<Self> {
        let gradient = [
            generator.vx.differentiate(Axis::X),
            generator.vx.differentiate(Axis::Y),
            generator.vy.differentiate(Axis::X),
            generator.vy.differentiate(Axis::Y),
        ];
        let mut iso = Self { generator, map: DiscreteMap::identity(grid), steps, gradient };
        let disp = exec::map_indices(grid * grid, mode, |i| {
            let p = ((i % grid) as f64 / grid as f64, (i / grid) as f64 / grid as f64);
            let (q, _) = iso.flow_with_jacobian(p, 1.0, |_, _, _| {});
            [q.0 - p.0, q.1 - p.1]
        });
        iso.map = DiscreteMap::new(grid, disp.iter().map(|d| d[0]).collect(), disp.iter().map(|d| d[1]).collect())?;
        let min_jac = iso.map.min_jacobian(mode);
        if !(min_jac > 0.0) {
            return Err(Error::ReduceAmplitude(format!("minimum Jacobian determinant {min_jac:e}")));
        }
        Ok(iso)
    }

    /// Flows `p` to time `t_end` together with `Dφ_t`, calling
    /// `visit(step, point, jacobian)` after each step and at the start.
    pub fn flow_with_jacobian(
        &self,
        p: (f64, f64),
        t_end: f64,
        mut visit: impl FnMut(usize, (f64, f64), [f64; 4]),
    ) -> ((f64, f64), [f64; 4]) {
        let steps = ((self.steps as f64 * t_end).round() as usize).max(1);
        let h = t_end / steps as f64;
        let rhs = |x: f64, y: f64, j: [f64; 4]| -> ([f64; 2], [f64; 4]) {
            let v = self.generator.eval(x, y);
            let g: Vec<f64> = self.gradient.iter().map(|d| d.eval(x, y)).collect();
            // d/dt J = Dv J with J = [[j0, j1], [j2, j3]]
            let dj = [
                g[0] * j[0] + g[1] * j[2],
                g[0] * j[1] + g[1] * j[3],
                g[2] * j[0] + g[3] * j[2],
                g[2] * j[1] + g[3] * j[3],
            ];
            (v, dj)
        };
        let (mut x, mut y) = p;
        let mut jac = [1.0, 0.0, 0.0, 1.0];
        visit(0, (x, y), jac);
        for k in 0..steps {
            let add =
                |j: [f64; 4], d: [f64; 4], s: f64| [j[0] + s * d[0], j[1] + s * d[1], j[2] + s * d[2], j[3] + s * d[3]];
            let (v1, j1) = rhs(x, y, jac);
            let (v2, j2) = rhs(x + 0.5 * h * v1[0], y + 0.5 * h * v1[1], add(jac, j1, 0.5 * h));
            let (v3, j3) = rhs(x + 0.5 * h * v2[0], y + 0.5 * h * v2[1], add(jac, j2, 0.5 * h));
            let (v4, j4) = rhs(x + h * v3[0], y + h * v3[1], add(jac, j3, h));
            x += h / 6.0 * (v1[0] + 2.0 * v2[0] + 2.0 * v3[0] + v4[0]);
            y += h / 6.0 * (v1[1] + 2.0 * v2[1] + 2.0 * v3[1] + v4[1]);
            for c in 0..4 {
                jac[c] += h / 6.0 * (j1[c] + 2.0 * j2[c] + 2.0 * j3[c] + j4[c]);
            }
            visit(k + 1, (x, y), jac);
        }
        ((x, y), jac)
    }
}

/// Random isotopy generated by `v = A·(t_prod·g, h)` with `t_prod` vanishing
/// on every circle and `g, h` random fields normalized to unit sup norm.
pub fn random_z_diffeo(z: &CriticalSet, seed: u64, amplitude: f64, grid: usize, mode: ExecMode) -> Result<ZIsotopy> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let t_prod = circle_product(z);
    let t_prod = t_prod.scale(1.0 / sup_sampled(&t_prod));
    let g = random_field(&mut rng);
    let h = random_field(&mut rng);
    let g = g.scale(1.0 / sup_sampled(&g));
    let h = h.scale(1.0 / sup_sampled(&h));
    let generator = VectorField { vx: t_prod.multiply(&g).scale(amplitude), vy: h.scale(amplitude) };
    ZIsotopy::from_generator(generator, grid, ISOTOPY_STEPS, mode)
}

pub struct HomotopyResult {
    /// `QΩ` projected from grid samples.
    pub q: OneForm,
    /// `sup |d(QΩ) - (φ*Ω - Ω)|` on the grid.
    pub residual: f64,
    /// `max |QΩ|` over circle samples.
    pub max_on_z: f64,
}

/// `QΩ = ∫_0^1 φ_t*(ι_v Ω) dt` by composite Simpson over `intervals`
/// (even) subintervals, sampled on an `m × m` grid.
pub fn homotopy_primitive(
    omega: &TwoForm,
    iso: &ZIsotopy,
    z: &CriticalSet,
    intervals: usize,
    m: usize,
    mode: ExecMode,
) -> Result<HomotopyResult> {
    if intervals == 0 || intervals % 2 == 1 {
        return Err(Error::InvalidInput("Simpson rule needs an even number of intervals".into()));
    }
    let w = omega.density();
    let sub = (iso.steps / intervals).max(1);
    let fine = intervals * sub;
    let stepper = ZIsotopy {
        generator: iso.generator.clone(),
        map: DiscreteMap::identity(4),
        steps: fine,
        gradient: iso.gradient.clone(),
    };
    let h = 1.0 / intervals as f64;
    let at_point = |p: (f64, f64)| -> ([f64; 2], f64) {
        let mut q = [0.0; 2];
        let ((fx, fy), jac) = stepper.flow_with_jacobian(p, 1.0, |k, (x, y), j| {
            if k % sub != 0 {
                return;
            }
            let node = k / sub;
            let weight = if node == 0 || node == intervals {
                1.0
            } else if node % 2 == 1 {
                4.0
            } else {
                2.0
            } * h
                / 3.0;
            let v = stepper.generator.eval(x, y);
            let wv = w.eval(x, y);
            let (ax, ay) = (-wv * v[1], wv * v[0]);
            q[0] += weight * (ax * j[0] + ay * j[2]);
            q[1] += weight * (ax * j[1] + ay * j[3]);
        });
        let det = jac[0] * jac[3] - jac[1] * jac[2];
        (q, w.eval(fx, fy) * det - w.eval(p.0, p.1))
    };
    let vals = exec::map_indices(m * m, mode, |i| at_point(((i % m) as f64 / m as f64, (i / m) as f64 / m as f64)));
    let qx: Vec<f64> = vals.iter().map(|v| v.0[0]).collect();
    let qy: Vec<f64> = vals.iter().map(|v| v.0[1]).collect();
    let bw = (m - 1) / 2;
    let (a, _) = SpectralField2D::project_samples(&qx, m, bw);
    let (b, _) = SpectralField2D::project_samples(&qy, m, bw);
    let q = OneForm { a, b };
    let dq = d1(&q).coef.grid_samples(m);
    let residual = dq.iter().zip(&vals).fold(0.0_f64, |r, (d, v)| r.max((d - v.1).abs()));
    let seeds = circle_seeds(z, 16);
    let on_z = exec::map_indices(seeds.len(), mode, |i| {
        let (q, _) = at_point(seeds[i]);
        q[0].abs().max(q[1].abs())
    });
    let max_on_z = on_z.into_iter().fold(0.0_f64, f64::max);
    Ok(HomotopyResult { q, residual, max_on_z })
}
