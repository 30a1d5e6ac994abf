use std::fmt::Write as _;

use schrlat::experiments::{
    grid_for, region_report, region_slice, reports_to_csv, run_knapp, run_morrey, run_upperbound,
    sigma_sweep, sweep_upperbound, ExperimentReport, Gate, KnappConfig, MorreyConfig, UpperboundConfig,
};
use schrlat::extension::{check_red, knapp_lower_bound, random_points, ExtensionConvention};
use schrlat::rational::{display, pow2, to_f64};
use schrlat::weight::WeightJson;
use schrlat::{
    brute_force_sup, build_lattice, lattice_self_similarity, mc_norm, min_modulus, omega_tilde, solution_at,
    sup_ball_mass, BoxUnionWeight, DyadicParams, Error, FrequencyProfile, KnappCell, NormKind, QuadratureSpec,
    Rational, SearchSpec,
};

use crate::args::{Cli, Command, Convention, Experiment, Extension, Format, Grid, NormArgs, Verify, WeightKind};
use crate::output::{emit, f, json};

pub enum Status {
    Ok,
    GateFailed,
}

pub enum Failure {
    Invalid(String),
    Io(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::Io(m) => Failure::Io(m),
            other => Failure::Invalid(other.to_string()),
        }
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::Io(e.to_string())
    }
}

type Outcome = Result<Status, Failure>;

fn invalid(msg: impl Into<String>) -> Failure {
    Failure::Invalid(msg.into())
}

struct Ctx<'a> {
    cli: &'a Cli,
    quad: QuadratureSpec,
}

impl Ctx<'_> {
    fn write(&self, csv: impl FnOnce() -> String, json: impl FnOnce() -> String) -> Result<(), Failure> {
        let body = match self.cli.format {
            Format::Csv => csv(),
            Format::Json => json(),
        };
        emit(self.cli.out.as_deref(), &body)?;
        Ok(())
    }

    fn report(&self, rep: &ExperimentReport) -> Outcome {
        self.write(|| rep.to_csv(), || json(rep))?;
        Ok(gate_status(rep.all_gates_pass()))
    }
}

fn gate_status(passed: bool) -> Status {
    if passed {
        Status::Ok
    } else {
        Status::GateFailed
    }
}

fn profile(g: &Grid) -> Result<FrequencyProfile, Failure> {
    let params = DyadicParams::from_sigma(g.delta_log2, &g.sigma)?;
    Ok(FrequencyProfile::new(params, g.level)?)
}

pub fn dispatch(cli: &Cli) -> Outcome {
    let ctx = Ctx {
        cli,
        quad: cli.quad.spec()?,
    };
    match &cli.command {
        Command::Profile(g) => {
            let p = profile(g)?;
            ctx.write(
                || {
                    let mut s = String::from("center,halfwidth\n");
                    for iv in p.intervals() {
                        let _ = writeln!(s, "{},{}", display(&iv.center), display(&iv.halfwidth));
                    }
                    s
                },
                || json(&p.to_json()),
            )?;
            Ok(Status::Ok)
        }
        Command::Solve { grid, n, x, t } => {
            let p = profile(grid)?;
            if *n < 2 || x.len() != n - 1 {
                return Err(invalid(format!("--x needs n-1 = {} coordinates", n.saturating_sub(1))));
            }
            let u = solution_at(&p, *n, x, *t, &ctx.quad);
            ctx.write(
                || format!("re,im,abs\n{},{},{}\n", f(u.re), f(u.im), f(u.norm())),
                || json(&serde_json::json!({ "re": u.re, "im": u.im, "abs": u.norm() })),
            )?;
            Ok(Status::Ok)
        }
        Command::Lattice { grid, n, c } => {
            let params = DyadicParams::from_sigma(grid.delta_log2, &grid.sigma)?;
            let l = build_lattice(params, grid.level, *n, c)?;
            ctx.write(|| l.to_csv(), || json(&l.to_json()))?;
            Ok(Status::Ok)
        }
        Command::Verify(v) => verify(&ctx, v),
        Command::Norm(a) => norm(&ctx, a),
        Command::Experiment(e) => experiment(&ctx, e),
        Command::Region { n, alpha } => {
            let rep = region_report(*n)?;
            let slice = alpha.map(|a| region_slice(*n, &a)).transpose()?;
            ctx.write(
                || {
                    let mut s = String::from("item,value\n");
                    let _ = writeln!(s, "positive,\"{}\"", rep.positive.formula);
                    let _ = writeln!(s, "knapp_false,\"{}\"", rep.knapp_false.formula);
                    if let Some(b) = &rep.paraboloid_false {
                        let _ = writeln!(s, "paraboloid_false,\"{}\"", b.formula);
                    }
                    for e in &rep.endpoints {
                        let _ = writeln!(s, "endpoint,\"({}, {}) {}\"", e.alpha, e.inv_p, e.note);
                    }
                    if let Some(sl) = &slice {
                        if let Some((lo, hi)) = &sl.positive {
                            let _ = writeln!(s, "slice_positive,\"{lo} <= 1/p < {hi}\"");
                        }
                        if let Some(v) = &sl.false_above {
                            let _ = writeln!(s, "slice_false_above,{v}");
                        }
                        if let Some((lo, hi)) = &sl.open_gap {
                            let _ = writeln!(s, "slice_open_gap,\"[{lo}, {hi}]\"");
                        }
                    }
                    s
                },
                || json(&serde_json::json!({ "region": rep, "slice": slice })),
            )?;
            Ok(Status::Ok)
        }
        Command::Extension(e) => extension(&ctx, e),
    }
}

fn verify(ctx: &Ctx, v: &Verify) -> Outcome {
    match v {
        Verify::Concentration {
            delta_log2,
            sigma,
            n,
            level,
            c,
            tolerance,
        } => {
            let mut rep = ExperimentReport::new("concentration", *n);
            rep.param("sigma", display(sigma));
            rep.param("level", level);
            rep.param("c", display(c));
            let target = *level as f64 * (*n as f64 - 1.0) * (1.0 - to_f64(sigma));
            let mut cert_ok = true;
            for &a in delta_log2 {
                let params = DyadicParams::from_sigma(a, sigma)?;
                let p = FrequencyProfile::new(params, *level)?;
                let l = build_lattice(params, *level, *n, c)?;
                let m = min_modulus(&p, &l, &ctx.quad)?;
                let s = -(a as i64);
                rep.push(s, "min_modulus", m.min);
                rep.push(s, "scaled_min", m.min / params.delta_f64().powf(target));
                rep.push(s, "ratio_to_mass", m.ratio_to_mass());
                if let Some(factor) = m.certificate_factor(*n) {
                    cert_ok &= m.ratio_to_mass() >= factor - 1e-9;
                }
            }
            let tol = tolerance.unwrap_or(if *level == 1 { 0.05 } else { 0.1 });
            let slope = rep.fit("min_modulus", Some(target))?.fit.slope;
            rep.gates.push(Gate::within("slope", slope, target, tol));
            rep.gates.push(Gate::new(
                "certificate",
                cert_ok,
                "min/mass >= cos-product of the phase certificate",
            ));
            ctx.report(&rep)
        }
        Verify::SelfSimilarity { grid, n, c } => {
            let p = profile(grid)?;
            let profile_ok = p.self_similar_decomposition().is_ok();
            let params = p.params();
            let check = lattice_self_similarity(&build_lattice(params, grid.level, *n, c)?)?;
            let witness = check
                .witness
                .as_ref()
                .map(|(x, t)| format!("({}; {t})", x.join(" ")))
                .unwrap_or_default();
            ctx.write(
                || format!("object,level,holds,witness\nprofile,{0},{profile_ok},\nlattice,{0},{1},{witness}\n", grid.level, check.holds),
                || json(&serde_json::json!({ "profile": profile_ok, "lattice": check })),
            )?;
            Ok(gate_status(profile_ok && check.holds))
        }
    }
}

fn norm(ctx: &Ctx, a: &NormArgs) -> Outcome {
    let kind = match (a.eta, a.alpha, a.p) {
        (Some(eta), None, None) => NormKind::BallMass { eta },
        (None, Some(alpha), Some(p)) => NormKind::Morrey { alpha, p },
        _ if a.dump_weight => NormKind::BallMass { eta: 0.0 },
        _ => return Err(invalid("give either --eta or both --alpha and --p")),
    };
    let mut weights: Vec<(Option<u32>, BoxUnionWeight)> = Vec::new();
    if let Some(path) = &a.weight_file {
        let text = std::fs::read_to_string(path)?;
        let wj: WeightJson = serde_json::from_str(&text).map_err(|e| invalid(e.to_string()))?;
        weights.push((None, BoxUnionWeight::from_json(&wj)?));
    } else {
        let which = a.weight.ok_or_else(|| invalid("give --weight or --weight-file"))?;
        let n = a.n.ok_or_else(|| invalid("--n is required"))?;
        if a.delta_log2.is_empty() {
            return Err(invalid("--delta-log2 is required"));
        }
        for &d in &a.delta_log2 {
            let w = match which {
                WeightKind::Knapp => KnappCell::new(n, pow2(-(d as i32)), KnappCell::default_c0())?.tube().clone(),
                WeightKind::Omega | WeightKind::OmegaTilde => {
                    let sigma = a.sigma.ok_or_else(|| invalid("--sigma is required for lattice weights"))?;
                    let params = DyadicParams::from_sigma(d, &sigma)?;
                    if which == WeightKind::Omega {
                        build_lattice(params, 1, n, &a.c)?.thicken(&a.rho)?
                    } else {
                        omega_tilde(params, 1, n, &a.c, &a.rho)?
                    }
                }
            };
            weights.push((Some(d), w));
        }
    }
    if a.dump_weight {
        if weights.len() != 1 {
            return Err(invalid("--dump-weight needs exactly one weight"));
        }
        emit(ctx.cli.out.as_deref(), &json(&weights[0].1.to_json()))?;
        return Ok(Status::Ok);
    }
    let search = SearchSpec {
        radius_ratio: a.radius_ratio,
        ..SearchSpec::default()
    };
    let (label, x1, p) = match kind {
        NormKind::BallMass { eta } => ("ball_mass", eta, String::new()),
        NormKind::Morrey { alpha, p } => ("morrey", alpha, f(p)),
    };
    let mut rows = Vec::new();
    for (d, w) in &weights {
        let r = match kind {
            NormKind::BallMass { eta } => sup_ball_mass(w, eta, &search)?,
            NormKind::Morrey { alpha, p } => mc_norm(w, alpha, p, &search)?,
        };
        let oracle = a.grid_step.map(|s| brute_force_sup(w, &kind, s)).transpose()?;
        rows.push((*d, w.dimension(), r, oracle));
    }
    ctx.write(
        || {
            let n = rows.first().map(|r| r.1).unwrap_or(0);
            let mut s = String::from("kind,n,eta_or_alpha,p,delta_log2,value,arg_r");
            for i in 1..=n {
                let _ = write!(s, ",arg_center_{i}");
            }
            if a.grid_step.is_some() {
                s.push_str(",oracle_value");
            }
            s.push('\n');
            for (d, n, r, o) in &rows {
                let _ = write!(
                    s,
                    "{label},{n},{},{p},{},{},{}",
                    f(x1),
                    d.map(|d| d.to_string()).unwrap_or_default(),
                    f(r.value),
                    f(r.radius)
                );
                for c in &r.center {
                    let _ = write!(s, ",{}", f(*c));
                }
                if let Some(o) = o {
                    let _ = write!(s, ",{}", f(o.value));
                }
                s.push('\n');
            }
            s
        },
        || {
            let items: Vec<_> = rows
                .iter()
                .map(|(d, n, r, o)| serde_json::json!({ "kind": kind, "n": n, "delta_log2": d, "result": r, "oracle": o }))
                .collect();
            json(&items)
        },
    )?;
    Ok(Status::Ok)
}

fn experiment(ctx: &Ctx, e: &Experiment) -> Outcome {
    match e {
        Experiment::Upperbound {
            n,
            eta,
            r_log2,
            sigma,
            c,
            rho,
            nodes,
        } => {
            let mut cfg = match sigma {
                Some(s) => UpperboundConfig::with_sigma(*n, *eta, *s, r_log2.clone())?,
                None => UpperboundConfig::new(*n, *eta, r_log2.clone())?,
            };
            cfg.c = *c;
            cfg.rho = *rho;
            cfg.nodes = *nodes;
            cfg.quad = ctx.quad;
            ctx.report(&run_upperbound(&cfg)?)
        }
        Experiment::UpperboundSweep { n, eta, a_min, max_axis } => {
            let sweep = sweep_upperbound(*n, *eta, *a_min, *max_axis)?;
            ctx.write(
                || {
                    let mut s = String::from("sigma,r_log2,implied_bound,skipped\n");
                    for e in &sweep.entries {
                        let grid: Vec<String> = e.r_log2.iter().map(|a| a.to_string()).collect();
                        let _ = writeln!(
                            s,
                            "{},{},{},{}",
                            display(&e.sigma),
                            grid.join(" "),
                            e.implied_bound.map(f).unwrap_or_default(),
                            e.skipped.clone().unwrap_or_default()
                        );
                    }
                    s
                },
                || json(&sweep),
            )?;
            Ok(Status::Ok)
        }
        Experiment::Knapp {
            n,
            alpha,
            p,
            delta_log2,
            samples,
        } => {
            let mut cfg = KnappConfig::new(*n, *alpha, *p, delta_log2.clone())?;
            cfg.samples = *samples;
            cfg.quad = ctx.quad;
            ctx.report(&run_knapp(&cfg)?)
        }
        Experiment::Morrey {
            n,
            alpha,
            p,
            sigma,
            delta_log2,
            c,
            rho,
        } => {
            let grid = if delta_log2.is_empty() {
                grid_for(sigma, c, 12, 3)?
            } else {
                delta_log2.clone()
            };
            let mut cfg = MorreyConfig::new(*n, *alpha, p.clone(), *sigma, grid)?;
            cfg.c = *c;
            cfg.rho = *rho;
            cfg.quad = ctx.quad;
            let rep = run_morrey(&cfg)?;
            ctx.report(&rep.report)
        }
        Experiment::MorreySweep {
            n,
            alpha,
            p,
            sigmas,
            min_times,
            tolerance,
        } => {
            let c = Rational::new(1, 40);
            let runs = sigmas
                .iter()
                .map(|s| Ok((*s, grid_for(s, &c, *min_times, 3)?)))
                .collect::<Result<Vec<_>, Error>>()?;
            let sweep = sigma_sweep(*n, *alpha, p, &runs)?;
            let passed = (sweep.threshold - sweep.reference).abs() <= *tolerance;
            let reports: Vec<ExperimentReport> = sweep.reports.iter().map(|r| r.report.clone()).collect();
            ctx.write(|| reports_to_csv(&reports), || json(&sweep))?;
            Ok(gate_status(passed))
        }
    }
}

fn extension(ctx: &Ctx, e: &Extension) -> Outcome {
    match e {
        Extension::CheckRed {
            grid,
            n,
            count,
            seed,
            convention,
        } => {
            let p = profile(grid)?;
            let half = 1.0 / p.params().delta_f64();
            let pts = random_points(*n, half, *count, *seed);
            let conv = match convention {
                Convention::Aligned => ExtensionConvention::PropagatorAligned,
                Convention::Literal => ExtensionConvention::Literal,
            };
            let rows = check_red(&p, *n, &pts, conv, &ctx.quad)?;
            ctx.write(
                || {
                    let mut s = String::new();
                    for i in 1..=*n {
                        let _ = write!(s, "x_{i},");
                    }
                    s.push_str("extension,solution,relative_difference\n");
                    for r in &rows {
                        for x in &r.x {
                            let _ = write!(s, "{},", f(*x));
                        }
                        let _ = writeln!(s, "{},{},{}", f(r.extension), f(r.solution), f(r.relative_difference));
                    }
                    s
                },
                || json(&rows),
            )?;
            Ok(Status::Ok)
        }
        Extension::Knapp { delta_log2, n, samples } => {
            let cell = KnappCell::new(*n, pow2(-(*delta_log2 as i32)), KnappCell::default_c0())?;
            let b = knapp_lower_bound(&cell, *samples, &ctx.quad)?;
            ctx.write(
                || {
                    format!(
                        "delta_log2,n,min_modulus,cell_mass,ratio,certified\n{delta_log2},{n},{},{},{},{}\n",
                        f(b.min_modulus),
                        f(b.reference),
                        f(b.ratio),
                        f(b.certified)
                    )
                },
                || json(&b),
            )?;
            Ok(Status::Ok)
        }
    }
}

