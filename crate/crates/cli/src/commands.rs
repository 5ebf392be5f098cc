//! The four subcommands. Each writes its files into the output directory
//! and returns whether the numerics converged.

use std::fmt::Write as _;
use std::path::Path;

use multipolar::closed_forms::HardyParameter;
use multipolar::discretization::{DiscreteProblem, ReducedGrid};
use multipolar::geometry::{
    check_circ_existence, check_nonattainability, check_polygon_existence_k, check_positivity, min_k_for_existence,
    same_sign_case, Mode,
};
use multipolar::minimizer::{compute_thresholds, extract_singular_exponents, Init, Minimizer, Preset};
use multipolar::potentials::{Potential, ReducedPoint};
use multipolar::studies::{
    beta_constant, beta_monte_carlo, fit_interaction_scaling, gamma_disambiguation, hardy_optimality_study,
    k_limit_study, riemann_table, ConvergenceTable, HardyStudyOptions,
};

use crate::config::{RunConfig, StudyKind};
use crate::output::{header, write_atomic};
use crate::CliError;

/// Whether the run met its numerical tolerances.
pub type Converged = bool;

fn save(out: &Path, name: &str, body: &str) -> Result<(), CliError> {
    write_atomic(out, name, body).map_err(|e| CliError::Io(format!("{}: {e}", out.join(name).display())))?;
    Ok(())
}

pub fn check(cfg: &RunConfig, out: &Path) -> Result<Converged, CliError> {
    let pc = cfg.pole_configuration()?;
    let mut s = header("check", cfg);
    let _ = writeln!(s, "{}", check_positivity(&pc));
    let n = pc.dimension();
    if !pc.polygons().is_empty() && n >= 4 {
        let rep = check_nonattainability(&pc);
        let _ = writeln!(s, "{rep}");
        if let Some(case) = same_sign_case(&rep) {
            let _ = writeln!(s, "notice: {case:?} masses, neither infimum is attained\n");
        }
        match check_circ_existence(&pc) {
            Ok(rep) => {
                let _ = writeln!(s, "{rep}");
            }
            Err(e) => {
                let _ = writeln!(s, "[circular existence]\nnot evaluated: {e}\n");
            }
        }
    }
    if !pc.polygons().is_empty() && n > 4 {
        if let Mode::Polygonal { .. } = pc.mode() {
            match check_polygon_existence_k(&pc) {
                Ok(rep) => {
                    let _ = writeln!(s, "{rep}");
                }
                Err(e) => {
                    let _ = writeln!(s, "[polygon existence]\nnot evaluated: {e}\n");
                }
            }
        }
        let _ = writeln!(s, "[minimal k]");
        match min_k_for_existence(&pc, cfg.check_k_max) {
            Ok(Some(k)) => {
                let _ = writeln!(s, "min_k = {k}\nverdict: achieved for k large (sufficient conditions hold from k = {k} on the search range)");
            }
            Ok(None) => {
                let _ = writeln!(
                    s,
                    "min_k = none\nverdict: sufficient conditions fail for every k <= {}",
                    cfg.check_k_max
                );
            }
            Err(e) => {
                let _ = writeln!(s, "not evaluated: {e}");
            }
        }
    }
    save(out, "check.txt", &s)?;
    Ok(true)
}

pub fn minimize(cfg: &RunConfig, out: &Path) -> Result<Converged, CliError> {
    let pc = cfg.pole_configuration()?;
    let grid = ReducedGrid::build(&cfg.grid, &pc)?;
    let pb = DiscreteProblem::new(grid, pc.clone())?;
    let minimizer = Minimizer::new(&pb)?;
    let init = if cfg.multistart {
        Init::Multistart
    } else {
        Init::Preset(Preset::Origin)
    };
    let res = minimizer.minimize(init, &cfg.solver)?;
    let thresholds = compute_thresholds(&cfg.grid, &pc, &cfg.solver)?;
    let exps = extract_singular_exponents(&pb, &res)?;

    let g = &pb.grid;
    let mut s = header("minimize", cfg);
    let mut kv = |k: &str, v: String| {
        let _ = writeln!(s, "{k} = {v}");
    };
    kv("grid.nodes", format!("{} x {} x {}", g.n_rho(), g.n_theta(), g.n_s()));
    kv("level", format!("{:.12e}", res.level));
    kv("converged", res.converged.to_string());
    kv("iterations", res.iterations.to_string());
    kv("residual", format!("{:.3e}", res.residual));
    let b = &res.breakdown;
    kv("energy.dirichlet", format!("{:.12e}", b.dirichlet));
    kv("energy.central", format!("{:.12e}", b.central));
    for (l, v) in b.potential.iter().enumerate() {
        kv(&format!("energy.ring.{l}"), format!("{v:.12e}"));
    }
    kv("energy.lp_norm", format!("{:.12e}", b.lp_norm));
    for (p, v) in &res.starts {
        kv(
            &format!("start.{}", format!("{p:?}").to_lowercase()),
            format!("{v:.12e}"),
        );
    }
    kv("threshold.sobolev_proxy", format!("{:.12e}", thresholds.sobolev_proxy));
    kv("threshold.central", format!("{:.12e}", thresholds.central));
    if let Some(v) = thresholds.k_sobolev {
        kv("threshold.k_sobolev", format!("{v:.12e}"));
    }
    for (l, v) in thresholds.per_pole.iter().enumerate() {
        if let Some(v) = v {
            kv(&format!("threshold.per_pole.{l}"), format!("{v:.12e}"));
        }
    }
    if let Some(v) = thresholds.merged {
        kv("threshold.merged", format!("{v:.12e}"));
    }
    kv("threshold.minimum", format!("{:.12e}", thresholds.minimum()));
    kv(
        "threshold.level_below_minimum",
        (res.level < thresholds.minimum()).to_string(),
    );
    for (name, fit) in [("origin", &exps.origin), ("infinity", &exps.infinity)] {
        kv(&format!("exponent.{name}"), format!("{:.6}", fit.exponent));
        kv(&format!("exponent.{name}.reliable"), fit.reliable.to_string());
    }
    for (l, fit) in exps.poles.iter().enumerate() {
        kv(&format!("exponent.ring.{l}"), format!("{:.6}", fit.exponent));
        kv(&format!("exponent.ring.{l}.reliable"), fit.reliable.to_string());
        if let Some(sing) = fit.singular {
            kv(
                &format!("exponent.ring.{l}.profile"),
                if sing { "singular" } else { "vanishing" }.into(),
            );
        }
    }
    save(out, "summary.txt", &s)?;

    let mut t = header("minimize", cfg);
    t.push_str("iteration,quotient,step,residual\n");
    for r in &res.trace {
        let _ = writeln!(
            t,
            "{},{:.17e},{:.17e},{:.17e}",
            r.iteration, r.quotient, r.step, r.residual
        );
    }
    save(out, "trace.csv", &t)?;

    let mut buf = header("minimize", cfg).into_bytes();
    res.field
        .write_csv(g, &mut buf)
        .map_err(|e| CliError::Io(e.to_string()))?;
    save(out, "profile.csv", &String::from_utf8(buf).expect("ascii output"))?;
    Ok(res.converged)
}

fn table_text(tab: &ConvergenceTable) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "{},value", tab.parameter_name);
    for (p, v) in tab.parameters.iter().zip(&tab.values) {
        let _ = writeln!(s, "{p:.17e},{v:.17e}");
    }
    s
}

fn table_summary(s: &mut String, tab: &ConvergenceTable) {
    if let Some(r) = tab.reference {
        let _ = writeln!(s, "reference = {r:.12e}");
    }
    if let Some(x) = tab.extrapolated {
        let _ = writeln!(s, "extrapolated = {x:.12e}");
    }
    let orders: Vec<String> = tab.orders.iter().map(|o| format!("{o:.4}")).collect();
    let _ = writeln!(s, "orders = {}", orders.join(","));
    if let Some(o) = tab.min_order() {
        let _ = writeln!(s, "min_order = {o:.4}");
    }
}

pub fn study(cfg: &RunConfig, out: &Path, seed: u64) -> Result<Converged, CliError> {
    let kind = cfg
        .study
        .kind
        .ok_or_else(|| CliError::Config("study: missing 'study = <kind>' line".into()))?;
    let st = &cfg.study;
    let n = cfg.dimension;
    let mut summary = header("study", cfg);
    let _ = writeln!(summary, "study = {}", kind.name());
    let mut csv = header("study", cfg);
    let mut converged = true;
    match kind {
        StudyKind::Hardy => {
            let shrink: Vec<f64> = (0..=st.shrink_decades).map(|j| 10f64.powi(-(j as i32))).collect();
            let opts = HardyStudyOptions {
                half_width: st.half_width,
                ..HardyStudyOptions::default()
            };
            let tab = hardy_optimality_study(n, st.ring_radius, &shrink, &opts)?;
            table_summary(&mut summary, &tab);
            csv.push_str(&table_text(&tab));
        }
        StudyKind::Scaling => {
            let p = HardyParameter::new(n, cfg.lambda0)?;
            let rep = fit_interaction_scaling(&p, st.xi, (st.mu_min, st.mu_max), st.mu_points)?;
            let _ = writeln!(summary, "regime = {:?}", rep.regime);
            let _ = writeln!(summary, "fitted_slope = {:.6}", rep.fitted_slope);
            let _ = writeln!(summary, "predicted_slope = {:.6}", rep.predicted_slope);
            let _ = writeln!(summary, "log_correction = {}", rep.log_correction);
            let _ = writeln!(summary, "max_residual = {:.3e}", rep.max_residual);
            let _ = writeln!(summary, "prefactor.measured = {:.12e}", rep.prefactor.0);
            let _ = writeln!(summary, "prefactor.predicted = {:.12e}", rep.prefactor.1);
            if let Some(c) = rep.log_constant_spread {
                let _ = writeln!(summary, "log_constant_spread = {c:.4e}");
            }
            let _ = writeln!(summary, "flagged = {}", rep.flagged);
            csv.push_str("mu,value\n");
            for (m, v) in rep.mu_grid.iter().zip(&rep.values) {
                let _ = writeln!(csv, "{m:.17e},{v:.17e}");
            }
        }
        StudyKind::Beta => {
            let p = HardyParameter::new(n, cfg.lambda0)?;
            let beta = beta_constant(&p)?;
            let mc = beta_monte_carlo(&p, st.samples, seed)?;
            let _ = writeln!(summary, "beta = {beta:.12e}");
            let _ = writeln!(summary, "monte_carlo.mean = {:.12e}", mc.mean);
            let _ = writeln!(summary, "monte_carlo.std_error = {:.6e}", mc.std_error);
            let _ = writeln!(summary, "monte_carlo.samples = {}", mc.samples);
            let _ = writeln!(summary, "monte_carlo.seed = {seed}");
            let _ = writeln!(summary, "sigmas = {:.4}", mc.sigmas_from(beta));
            csv.push_str("quantity,value\n");
            let _ = writeln!(csv, "beta,{beta:.17e}\nmonte_carlo,{:.17e}", mc.mean);
        }
        StudyKind::Gamma => {
            let p = HardyParameter::new(n, cfg.lambda0)?;
            let rep = gamma_disambiguation(&p, st.mu, st.xi, st.tolerance)?;
            let _ = writeln!(summary, "measured = {:.12e}", rep.measured);
            let _ = writeln!(summary, "gamma.plus = {:.12e}", rep.gamma_plus);
            let _ = writeln!(summary, "gamma.minus = {:.12e}", rep.gamma_minus);
            let _ = writeln!(summary, "predicted.plus = {:.12e}", rep.predicted_plus);
            let _ = writeln!(summary, "predicted.minus = {:.12e}", rep.predicted_minus);
            let m = rep
                .matching
                .map_or("none".to_string(), |c| format!("{c:?}").to_lowercase());
            let _ = writeln!(summary, "matching = {m}");
            csv.push_str("convention,predicted,ratio\n");
            use multipolar::studies::GammaConvention::{Minus, Plus};
            let _ = writeln!(csv, "plus,{:.17e},{:.17e}", rep.predicted_plus, rep.ratio(Plus));
            let _ = writeln!(csv, "minus,{:.17e},{:.17e}", rep.predicted_minus, rep.ratio(Minus));
        }
        StudyKind::KLimit => {
            let pc = cfg.pole_configuration()?;
            let rep = k_limit_study(&cfg.grid, &pc, &cfg.k_list, st.tolerance, &cfg.solver)?;
            converged = rep.converged.iter().all(|&c| c);
            let _ = writeln!(summary, "circular_level = {:.12e}", rep.circular_level);
            if let Some(lo) = rep.lower_proxy {
                let _ = writeln!(summary, "lower_proxy = {lo:.12e}");
            }
            let _ = writeln!(summary, "tolerance = {}", rep.tolerance);
            let _ = writeln!(summary, "monotone_gap = {}", rep.monotone_gap);
            let _ = writeln!(summary, "converged = {converged}");
            table_summary(&mut summary, &rep.table);
            csv.push_str("k,level,sandwich,converged,residual\n");
            for (idx, k) in cfg.k_list.iter().enumerate() {
                let _ = writeln!(
                    csv,
                    "{k},{:.17e},{},{},{:.3e}",
                    rep.table.values[idx], rep.sandwich[idx], rep.converged[idx], rep.residuals[idx]
                );
            }
        }
        StudyKind::Riemann => {
            let pc = cfg.pole_configuration()?;
            let [rho, theta, s] = st.point;
            let tab = riemann_table(&pc, &ReducedPoint::new(rho, theta, s), &cfg.k_list)?;
            table_summary(&mut summary, &tab);
            csv.push_str("k,value,abs_error\n");
            let r = tab.reference.unwrap_or(f64::NAN);
            for (k, v) in tab.parameters.iter().zip(&tab.values) {
                let _ = writeln!(csv, "{k},{v:.17e},{:.17e}", (v - r).abs());
            }
        }
    }
    save(out, "study.txt", &summary)?;
    save(out, "study.csv", &csv)?;
    Ok(converged)
}

/// Ring part of the polygon potential beside its circle limit at each sample
/// point; singular samples get a note instead of values.
pub fn potential_table(cfg: &RunConfig, out: &Path) -> Result<Converged, CliError> {
    let pc = cfg.pole_configuration()?;
    if pc.k().is_none() {
        return Err(CliError::Config("potential-table needs mode = polygonal with k".into()));
    }
    if cfg.samples.is_empty() {
        return Err(CliError::Config(
            "potential-table needs at least one 'sample = rho,theta,s' line".into(),
        ));
    }
    let poly = Potential::new(&pc);
    let circ = Potential::new(&pc.to_circular());
    let sum = |p: &Potential, y: &ReducedPoint| -> multipolar::error::Result<f64> {
        let mut v = 0.0;
        for l in 0..p.ring_count() {
            v += p.ring(l, y)?;
        }
        Ok(v)
    };
    let mut s = header("potential-table", cfg);
    s.push_str("rho,theta,s,V_polygon,V_circle_limit,abs_diff,note\n");
    for &[rho, theta, z] in &cfg.samples {
        let y = ReducedPoint::new(rho, theta, z);
        match (sum(&poly, &y), sum(&circ, &y)) {
            (Ok(a), Ok(b)) => {
                let _ = writeln!(
                    s,
                    "{rho:.17e},{theta:.17e},{z:.17e},{a:.17e},{b:.17e},{:.17e},",
                    (a - b).abs()
                );
            }
            (Err(e), _) | (_, Err(e)) => {
                let _ = writeln!(
                    s,
                    "{rho:.17e},{theta:.17e},{z:.17e},,,,{}",
                    e.to_string().replace(',', ";")
                );
            }
        }
    }
    save(out, "potential_table.csv", &s)?;
    Ok(true)
}
