//! The named scenarios. Each one writes its artifacts, a `report.jsonl` with one record per
//! invariant, the effective configuration and a `manifest.txt`.

use std::f64::consts::PI;
use std::path::Path;

use clap::ValueEnum;
use conformal_optics::electrostatics::{
    build_charge_model, multipole_projected_potential, phase_match_score, projected_potential_2d,
    HarmonicTarget,
};
use conformal_optics::phase::sector_phase_values;
use conformal_optics::scalar::angular_distance;
use conformal_optics::sorter::{
    astigmatism_to_amplitude, dipole_moment_to_amplitude, sweep_strength, SweepResult,
};
use conformal_optics::*;
use thiserror::Error;

use crate::config::{ConfigError, ScenarioConfig};
use crate::output::{IoError, OutputDir};
use crate::report::{self, Check};
use crate::suites::{self, PlateParams};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Scenario {
    #[value(name = "fig1-sector")]
    Fig1Sector,
    #[value(name = "fig2-charges")]
    Fig2Charges,
    #[value(name = "fig3-astig")]
    Fig3Astig,
    #[value(name = "fig3-dipole")]
    Fig3Dipole,
    #[value(name = "figS1-cascade")]
    FigS1Cascade,
    #[value(name = "fig4-monopole")]
    Fig4Monopole,
    #[value(name = "verify")]
    Verify,
}

impl Scenario {
    pub const ALL: [Scenario; 7] = [
        Scenario::Fig1Sector,
        Scenario::Fig2Charges,
        Scenario::Fig3Astig,
        Scenario::Fig3Dipole,
        Scenario::FigS1Cascade,
        Scenario::Fig4Monopole,
        Scenario::Verify,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Scenario::Fig1Sector => "fig1-sector",
            Scenario::Fig2Charges => "fig2-charges",
            Scenario::Fig3Astig => "fig3-astig",
            Scenario::Fig3Dipole => "fig3-dipole",
            Scenario::FigS1Cascade => "figS1-cascade",
            Scenario::Fig4Monopole => "fig4-monopole",
            Scenario::Verify => "verify",
        }
    }

    fn default_n(self) -> f64 {
        match self {
            Scenario::Fig3Astig => -0.5,
            Scenario::FigS1Cascade => -2.0,
            _ => 1.0,
        }
    }

    fn default_m(self) -> f64 {
        match self {
            Scenario::Fig3Astig => 2.0,
            _ => -1.0,
        }
    }

    fn uses_charge_grid(self) -> bool {
        matches!(self, Scenario::Fig2Charges | Scenario::Fig4Monopole)
    }
}

#[derive(Debug, Error)]
pub enum ScenarioError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    /// A parameter combination the optics rejects (bad grid, sorting condition, clipping,
    /// undersampling, unsupported kernel).
    #[error("invalid configuration: {0}")]
    Parameter(OpticsError),
    /// A failure while running a valid configuration.
    #[error("{0}")]
    Runtime(OpticsError),
    #[error(transparent)]
    Io(#[from] IoError),
}

impl From<OpticsError> for ScenarioError {
    fn from(e: OpticsError) -> Self {
        match e {
            OpticsError::InvalidGrid(_)
            | OpticsError::InvalidParameter { .. }
            | OpticsError::ClippedAperture { .. }
            | OpticsError::SortingCondition(_)
            | OpticsError::Undersampled { .. }
            | OpticsError::Unsupported(_)
            | OpticsError::BudgetExceeded { .. } => ScenarioError::Parameter(e),
            e => ScenarioError::Runtime(e),
        }
    }
}

impl ScenarioError {
    pub fn exit_code(&self) -> i32 {
        match self {
            ScenarioError::Runtime(_) => 1,
            ScenarioError::Config(_) | ScenarioError::Parameter(_) => 2,
            ScenarioError::Io(_) => 3,
        }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            ScenarioError::Config(_) => "config",
            ScenarioError::Parameter(_) => "parameter",
            ScenarioError::Runtime(_) => "runtime",
            ScenarioError::Io(_) => "io",
        }
    }
}

#[derive(Debug, Clone)]
pub struct Outcome {
    pub checks: Vec<Check>,
    pub manifest: String,
}

impl Outcome {
    pub fn passed(&self) -> bool {
        report::failures(&self.checks).is_empty()
    }
}

/// Parameters shared by all scenarios, resolved from the config with scenario defaults.
struct Setup {
    scenario: Scenario,
    beam: Beam,
    a: f64,
    b: f64,
    f: f64,
    theta0: f64,
    grid: Grid,
    kernel: Kernel,
    f_lens: f64,
}

impl Setup {
    fn new(scenario: Scenario, cfg: &ScenarioConfig) -> Result<Self, ScenarioError> {
        let beam = Beam::new(cfg.float("beam.lambda_m"))?;
        let a = cfg.float("transform.a_m");
        let b = cfg.float("transform.b_m");
        let f = cfg.float("transform.f_m");
        let nx = cfg.count_or("grid.nx", 1024);
        let ny = cfg.count_or("grid.ny", nx);
        let default_pitch = if scenario.uses_charge_grid() {
            3.2 * charge_radius(cfg, b) / nx as f64
        } else {
            b / 128.0
        };
        let pitch = cfg.float_or("grid.pitch_m", default_pitch);
        let kernel_default = match scenario {
            Scenario::Fig1Sector => "printed",
            _ => "fresnel",
        };
        let kernel = match cfg.text_or("propagation.kernel", kernel_default) {
            "printed" => Kernel::Printed,
            _ => Kernel::Fresnel,
        };
        Ok(Self {
            scenario,
            beam,
            a,
            b,
            f,
            theta0: cfg.float("transform.theta0_rad"),
            grid: Grid::new(nx, ny, pitch, pitch)?,
            kernel,
            f_lens: cfg.float_or("lens.f_m", f),
        })
    }

    fn n(&self, cfg: &ScenarioConfig) -> f64 {
        cfg.float_or("transform.n", self.scenario.default_n())
    }

    fn transformer(&self, n: f64) -> Result<Sector, ScenarioError> {
        Ok(Sector::transformer(n, self.a, self.b, self.theta0, self.f)?)
    }

    fn envelope(&self, cfg: &ScenarioConfig, default_kind: &str) -> Result<Envelope<f64>, ScenarioError> {
        let b = self.b;
        let env = match cfg.text_or("envelope.kind", default_kind) {
            "gaussian" => Envelope::Gaussian {
                ring_radius: cfg.float_or("envelope.ring_m", 1.5 * b),
                waist: cfg.float_or("envelope.waist_m", b / 2.0),
                r_inner: cfg.float_or("envelope.r_inner_m", 0.0),
            },
            _ => Envelope::Annulus {
                r_inner: cfg.float_or("envelope.r_inner_m", b / 2.0),
                r_outer: cfg.float_or("envelope.r_outer_m", 2.0 * b),
            },
        };
        env.validate()?;
        Ok(env)
    }

    fn plate_params(&self) -> PlateParams {
        PlateParams {
            a: self.a,
            b: self.b,
            f: self.f,
            lambda: self.beam.wavelength,
        }
    }
}

fn charge_radius(cfg: &ScenarioConfig, b: f64) -> f64 {
    cfg.float_or("charges.radius_m", 2.0 * b)
}

fn tag(n: f64) -> String {
    format!("n{n:+}")
}

fn deg(x: f64) -> f64 {
    x.to_degrees()
}

/// Runs `scenario` and writes everything under `out`. Invariant failures are reported in
/// the returned checks, not as an error.
pub fn run(scenario: Scenario, cfg: &ScenarioConfig, out: &Path) -> Result<Outcome, ScenarioError> {
    cfg.check_scenario(scenario.name())?;
    let setup = Setup::new(scenario, cfg)?;
    let mut dir = OutputDir::create(out)?;
    let checks = match scenario {
        Scenario::Fig1Sector => fig1_sector(&setup, cfg, &mut dir)?,
        Scenario::Fig2Charges => fig2_charges(&setup, cfg, &mut dir)?,
        Scenario::Fig3Astig | Scenario::Fig3Dipole => fig3(&setup, cfg, &mut dir)?,
        Scenario::FigS1Cascade => fig_s1_cascade(&setup, cfg, &mut dir)?,
        Scenario::Fig4Monopole => fig4_monopole(&setup, cfg, &mut dir)?,
        Scenario::Verify => verify(&setup, &mut dir)?,
    };
    dir.write_text("config.cfg", &cfg.serialize())?;
    dir.write_text("report.jsonl", &report::to_jsonl(&checks))?;
    let manifest = dir.finish()?;
    Ok(Outcome { checks, manifest })
}

/// Shortest distance from `(rho, phi)` to the wedge `|phi| <= half` (both edge rays).
fn distance_to_wedge(rho: f64, phi: f64, half: f64) -> f64 {
    if phi.abs() <= half {
        return 0.0;
    }
    [half, -half]
        .iter()
        .map(|e| {
            let d = phi - e;
            if rho * d.cos() > 0.0 {
                rho * d.sin().abs()
            } else {
                rho
            }
        })
        .fold(f64::INFINITY, f64::min)
}

/// Mean intensity per radial bin of one output pixel.
fn radial_profile(image: &Scalars) -> Vec<f64> {
    let g = image.grid();
    let bins = g.nx.min(g.ny) / 2;
    let mut sum = vec![0.0; bins];
    let mut count = vec![0usize; bins];
    for (idx, &v) in image.values().iter().enumerate() {
        let (u, w) = g.xy(idx);
        let bin = (u.hypot(w) / g.dx).round() as usize;
        if bin < bins {
            sum[bin] += v;
            count[bin] += 1;
        }
    }
    sum.iter().zip(&count).map(|(s, &c)| if c > 0 { s / c as f64 } else { 0.0 }).collect()
}

fn argmax(v: &[f64]) -> usize {
    // bin 0 is the on-axis pixel alone; skip it
    (1..v.len()).fold(1, |best, i| if v[i] > v[best] { i } else { best })
}

fn fig1_sector(s: &Setup, cfg: &ScenarioConfig, dir: &mut OutputDir) -> Result<Vec<Check>, ScenarioError> {
    let l = cfg.float("input.l");
    if l.fract() != 0.0 || l.abs() > 1e6 {
        return Err(ConfigError::InvalidValue {
            origin: "config".into(),
            key: "input.l".into(),
            msg: "vortex charge must be an integer".into(),
        }
        .into());
    }
    let input = AnalyticBeam::Vortex {
        l: l as i32,
        envelope: s.envelope(cfg, "gaussian")?,
    };
    let psi = input.sample(s.grid)?;
    dir.write_pgm("input_intensity.pgm", &psi.intensity())?;
    let mut checks = Vec::new();
    for n in cfg.list("fig1.ns") {
        let t = tag(n);
        let spec = s.transformer(n)?;
        let plate = sector_transformer_phase(&s.grid, &spec, &s.beam)?;
        let out = fresnel_fft(&apply_phase(&psi, &plate)?, s.f, &s.beam, s.kernel)?;
        let og = *out.grid();
        let intensity = out.intensity();
        // the full azimuth lands in a wedge of opening 2 pi/|n| around the image of theta = 0
        let (cu, cv) = analytic_map(&spec).eval_polar(s.b, 0.0);
        let center = cv.atan2(cu);
        let half = PI / n.abs();
        let (mut inside, mut total) = (0.0, 0.0);
        for (idx, &v) in intensity.values().iter().enumerate() {
            let (u, w) = og.xy(idx);
            let phi = conformal_optics::scalar::wrap_angle(w.atan2(u) - center);
            total += v;
            if distance_to_wedge(u.hypot(w), phi, half) <= 2.0 * og.dx {
                inside += v;
            }
        }
        let spa = stationary_phase_eval(Some(&spec), &input, s.f, &s.beam, &og, s.kernel)?;
        let spa_intensity = spa.field.intensity();
        let prof = radial_profile(&intensity);
        let spa_prof = radial_profile(&spa_intensity);
        let (pk, spk) = (argmax(&prof), argmax(&spa_prof));

        checks.push(Check::at_least(format!("fig1.{t}.sector_energy_fraction"), inside / total, 0.9));
        checks.push(Check::at_most(
            format!("fig1.{t}.radial_peak_offset_px"),
            (pk as f64 - spk as f64).abs(),
            1.0,
        ));
        dir.write_pgm(&format!("intensity_{t}.pgm"), &intensity)?;
        dir.write_pgm(&format!("spa_intensity_{t}.pgm"), &spa_intensity)?;
        dir.write_cfof(&format!("output_{t}.cfof"), &out, s.beam.wavelength)?;
        let mut csv = String::from("bin,rho_m,fft_mean_intensity,spa_mean_intensity\n");
        for (i, (p, q)) in prof.iter().zip(&spa_prof).enumerate() {
            csv.push_str(&format!("{i},{:e},{p:e},{q:e}\n", i as f64 * og.dx));
        }
        dir.write_text(&format!("radial_profile_{t}.csv"), &csv)?;
    }
    Ok(checks)
}

fn fig2_charges(s: &Setup, cfg: &ScenarioConfig, dir: &mut OutputDir) -> Result<Vec<Check>, ScenarioError> {
    let grid = s.grid;
    let r_big = charge_radius(cfg, s.b);
    let separation = cfg.float_or("charges.separation_m", 2.0 * grid.dx);
    let rho_ref = cfg.float_or("charges.rho_ref_m", r_big);
    // mid-annulus, clear of the ring, the origin and the line charge on theta = pi
    let mask = Mask::annulus(&grid, 0.2 * r_big, 0.8 * r_big).without_cut(&grid, 3.0 * grid.dx);
    let mut checks = Vec::new();
    let mut csv = String::from("plate,n,order,q_line,q_ring,net_charge,correlation,scale\n");
    for n in cfg.list("fig1.ns") {
        let t = tag(n);
        for (kind, spec) in [
            ("transformer", Sector::transformer(n, s.a, s.b, s.theta0, s.f)?),
            ("corrector", Sector::corrector(n, s.a, s.b, s.theta0, s.f)?),
        ] {
            let target = HarmonicTarget::from_sector(&spec, &s.beam);
            let model = build_charge_model(&target, r_big, separation)?;
            let pot = projected_potential_2d(&model, &grid, rho_ref)?;
            let phase = sector_phase_values(&grid, &spec, &s.beam)?;
            let score = phase_match_score(&pot, &phase, &mask)?;
            let order = target.m;
            let bound = if order.fract() == 0.0 { 0.999 } else { 0.95 };
            checks.push(Check::above(format!("fig2.{t}.{kind}.correlation"), score.correlation, bound));
            if kind == "corrector" && order.fract() == 0.0 && order < 0.0 {
                // the textbook multipole fixes orientation and sign, so compare the shape only
                let closed = multipole_projected_potential((-order) as u32, &grid)?;
                let c = phase_match_score(&closed, &phase, &mask)?;
                checks.push(Check::above(
                    format!("fig2.{t}.corrector.closed_form_abs_correlation"),
                    c.correlation.abs(),
                    0.999,
                ));
            }
            csv.push_str(&format!(
                "{kind},{n},{order},{:e},{:e},{:e},{:.9},{:e}\n",
                model.q_line,
                model.q_ring,
                model.net_charge(),
                score.correlation,
                score.scale
            ));
            dir.write_pgm(&format!("potential_{kind}_{t}.pgm"), &pot.values)?;
            dir.write_pgm(&format!("phase_{kind}_{t}.pgm"), &phase)?;
        }
    }
    dir.write_text("match_scores.csv", &csv)?;
    Ok(checks)
}

struct SweepInputs {
    amplitudes: Vec<f64>,
    orientations: Vec<f64>,
}

fn sweep_inputs(s: &Setup, cfg: &ScenarioConfig) -> Result<SweepInputs, ScenarioError> {
    let amplitudes = match s.scenario {
        Scenario::Fig3Astig => {
            let f_obj = cfg.float("astig.f_obj_m");
            cfg.list("sweep.strengths_m")
                .iter()
                .map(|&c| astigmatism_to_amplitude(c, f_obj, &s.beam))
                .collect::<Result<Vec<_>>>()?
        }
        _ => cfg.list("sweep.moments_muB").iter().map(|&mu| dipole_moment_to_amplitude(mu)).collect(),
    };
    let orientations = cfg.list("sweep.orientations_deg").iter().map(|d| d.to_radians()).collect();
    Ok(SweepInputs {
        amplitudes,
        orientations,
    })
}

fn build_sorter(s: &Setup, cfg: &ScenarioConfig, optics: SortingOptics<f64>) -> Result<Sorter, ScenarioError> {
    let m = cfg.float_or("input.m", s.scenario.default_m());
    let sc = SorterConfig::new(optics, m, s.envelope(cfg, "annulus")?, s.f_lens, s.kernel, s.grid, s.beam)?;
    Ok(Sorter::new(sc)?)
}

/// Per-row checks shared by the sorter scenarios.
fn sweep_checks(prefix: &str, sorter: &Sorter, sweep: &SweepResult<f64>) -> Vec<Check> {
    let cfg = sorter.config();
    let m = cfg.m;
    let px = sorter.window_grid().dx;
    let period = 2.0 * PI / m.abs();
    let mut failed = 0;
    let (mut th_err, mut az_err, mut s_err): (f64, f64, f64) = (0.0, 0.0, 0.0);
    for row in &sweep.rows {
        let Ok(spot) = &row.result else {
            failed += 1;
            continue;
        };
        let input = Multipole::new(m, row.a_in, row.theta0_in).expect("validated by the sweep");
        let (pu, pv) = cfg.predicted_spot(&input);
        th_err = th_err.max(match spot.theta0_est {
            Some(th) => angular_distance(th, row.theta0_in, period),
            None => f64::INFINITY,
        });
        az_err = az_err.max(angular_distance(spot.azimuth, pv.atan2(pu), 2.0 * PI));
        s_err = s_err.max((spot.shift - pu.hypot(pv)).abs() / px);
    }
    let mut checks = vec![Check::at_most(format!("{prefix}.failed_rows"), failed as f64, 0.0)];
    if let Some(fit) = sweep.fit {
        checks.push(Check::above(format!("{prefix}.shift_fit_r_squared"), fit.r_squared, 0.999));
        checks.push(Check::below(format!("{prefix}.shift_fit_intercept_px"), fit.intercept.abs() / px, 1.0));
    }
    checks.push(Check::at_most(format!("{prefix}.max_theta0_error_deg"), deg(th_err), 2.0));
    checks.push(Check::at_most(format!("{prefix}.max_azimuth_error_deg"), deg(az_err), 2.0 * m.abs()));
    checks.push(Check::below(format!("{prefix}.max_shift_error_px"), s_err, 1.0));
    checks
}

fn fig3(s: &Setup, cfg: &ScenarioConfig, dir: &mut OutputDir) -> Result<Vec<Check>, ScenarioError> {
    let prefix = s.scenario.name().replace('-', ".");
    let sorter = build_sorter(s, cfg, SortingOptics::Single(s.transformer(s.n(cfg))?))?;
    let inputs = sweep_inputs(s, cfg)?;
    let sweep = sweep_strength(&sorter, &inputs.amplitudes, &inputs.orientations)?;
    dir.write_text("sweep.csv", &sweep.to_csv())?;
    let checks = sweep_checks(&prefix, &sorter, &sweep);

    // panels: (a) weakest, (b-e) middle strength at each orientation, (f) strongest
    let (amps, ths) = (&inputs.amplitudes, &inputs.orientations);
    let mut panels = vec![(amps[0], ths[0])];
    panels.extend(ths.iter().take(4).map(|&th| (amps[amps.len() / 2], th)));
    panels.push((amps[amps.len() - 1], ths[0]));
    let m = sorter.config().m;
    for (label, (a, th)) in ('a'..).zip(panels) {
        let run = sorter.run(&Multipole::new(m, a, th)?)?;
        dir.write_pgm(&format!("panel_{label}.pgm"), &run.window)?;
    }
    Ok(checks)
}

fn fig_s1_cascade(s: &Setup, cfg: &ScenarioConfig, dir: &mut OutputDir) -> Result<Vec<Check>, ScenarioError> {
    let second = Sector::transformer(
        cfg.float("cascade.n2"),
        cfg.float("cascade.a2_m"),
        cfg.float("cascade.b2_m"),
        0.0,
        cfg.float_or("cascade.f2_m", s.f),
    )?;
    let cascade = build_sorter(s, cfg, SortingOptics::Cascade(s.transformer(s.n(cfg))?, second))?;
    let single = build_sorter(s, cfg, SortingOptics::Single(s.transformer(1.0)?))?;
    let inputs = sweep_inputs(s, cfg)?;
    let sc = sweep_strength(&cascade, &inputs.amplitudes, &inputs.orientations)?;
    let ss = sweep_strength(&single, &inputs.amplitudes, &inputs.orientations)?;
    dir.write_text("sweep_cascade.csv", &sc.to_csv())?;
    dir.write_text("sweep_single.csv", &ss.to_csv())?;
    let mut checks = sweep_checks("figS1.cascade", &cascade, &sc);
    checks.extend(sweep_checks("figS1.single", &single, &ss));
    let period = 2.0 * PI / cascade.config().m.abs();
    let (mut a_err, mut th_err): (f64, f64) = (0.0, 0.0);
    for (rc, rs) in sc.rows.iter().zip(&ss.rows) {
        match (&rc.result, &rs.result) {
            (Ok(c), Ok(s1)) => {
                a_err = a_err.max((c.a_est / s1.a_est - 1.0).abs());
                th_err = th_err.max(match (c.theta0_est, s1.theta0_est) {
                    (Some(x), Some(y)) => angular_distance(x, y, period),
                    _ => f64::INFINITY,
                });
            }
            _ => {
                a_err = f64::INFINITY;
                th_err = f64::INFINITY;
            }
        }
    }
    checks.push(Check::below("figS1.cascade_vs_single.max_rel_amplitude_diff", a_err, 0.05));
    checks.push(Check::at_most("figS1.cascade_vs_single.max_theta0_diff_deg", deg(th_err), 2.0));
    Ok(checks)
}

fn fig4_monopole(s: &Setup, cfg: &ScenarioConfig, dir: &mut OutputDir) -> Result<Vec<Check>, ScenarioError> {
    let grid = s.grid;
    let r_big = charge_radius(cfg, s.b);
    let spec = s.transformer(1.0)?;
    let target = HarmonicTarget::from_sector(&spec, &s.beam);
    let model = build_charge_model(&target, r_big, cfg.float_or("charges.separation_m", 2.0 * grid.dx))?;
    let pot = projected_potential_2d(&model, &grid, cfg.float_or("charges.rho_ref_m", r_big))?;
    let phase = sector_phase_values(&grid, &spec, &s.beam)?;
    let score = phase_match_score(&pot, &phase, &Mask::annulus(&grid, 0.2 * r_big, 0.8 * r_big))?;
    dir.write_pgm("potential_monopole.pgm", &pot.values)?;
    dir.write_pgm("phase_log_plate.pgm", &phase)?;
    dir.write_text(
        "match_score.csv",
        &format!(
            "net_charge,correlation,scale\n{:e},{:.9},{:e}\n",
            model.net_charge(),
            score.correlation,
            score.scale
        ),
    )?;

    // the log plate acting on a dipole phase, on the sorter grid
    let sorter_setup = Setup::new(Scenario::Fig3Dipole, cfg)?;
    let sorter = build_sorter(&sorter_setup, cfg, SortingOptics::Single(sorter_setup.transformer(1.0)?))?;
    let amplitude = dipole_moment_to_amplitude(cfg.list("sweep.moments_muB")[0]);
    let theta0 = cfg.list("sweep.orientations_deg")[0].to_radians();
    let dipole = Multipole::new(sorter.config().m, amplitude, theta0)?;
    let input = make_multipole_beam(sorter.config().grid, &dipole, &sorter.config().envelope)?;
    dir.write_cfof("dipole_input.cfof", &input, s.beam.wavelength)?;
    dir.write_cfof("dipole_transformed.cfof", &sorter.propagate(&dipole)?, s.beam.wavelength)?;
    Ok(vec![Check::above("fig4.monopole_vs_log.correlation", score.correlation, 0.999)])
}

fn verify(s: &Setup, dir: &mut OutputDir) -> Result<Vec<Check>, ScenarioError> {
    let p = s.plate_params();
    let fine = s.grid.nx.min(s.grid.ny);
    let coarse = fine / 2;
    let mut checks = Vec::new();
    for n in suites::PLATE_FACTORS {
        checks.extend(suites::harmonicity(&p, n, coarse)?);
    }
    for n in suites::PLATE_FACTORS {
        checks.extend(suites::map_equivalence(&p, n, coarse)?);
    }
    let cr = suites::cauchy_riemann(&p, coarse)?;
    checks.extend(cr.checks);
    // a holomorphic map is not a gradient field, so no single plate realises the cascade
    checks.push(Check::above(
        "cauchy_riemann.cascade.irrotational_rel",
        cr.composition_irrotational_rel,
        1e-3,
    ));
    checks.extend(suites::propagator_oracle(&p, 0..3)?);
    checks.extend(suites::unitarity(&p, fine)?);
    let mut csv = String::from("name,measured,pass\n");
    for c in &checks {
        csv.push_str(&format!("{},{:e},{}\n", c.name, c.measured, c.pass));
    }
    dir.write_text("residuals.csv", &csv)?;
    Ok(checks)
}
