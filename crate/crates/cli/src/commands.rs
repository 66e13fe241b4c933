use std::io::Write;
use std::path::Path;

use rayon::prelude::*;

use qtm_core::collision::{convergence_order, linear_fit, run_to_steady, SteadyCycleResult};
use qtm_core::liouvillian::{assemble, steady_state};
use qtm_core::model::config::{render, Grid};
use qtm_core::thermo::sweep::{efficiency_at_max_power, engine_curve, sweep as run_sweep};
use qtm_core::thermo::{classify_regime, closed_form_currents, coherence_metrics, CURRENT_FLOOR};

use crate::output;
use crate::select::{load, scenarios, tau_list};
use crate::CliError;

pub fn validate(path: &Path, out: &mut impl Write) -> Result<(), CliError> {
    let config = load(path)?;
    for w in config.scenario.warnings() {
        writeln!(out, "# warning: {w}")?;
    }
    write!(out, "{}", render(&config))?;
    Ok(())
}

pub fn steady(path: &Path, list: Option<&str>, ratio: Option<f64>, out: &mut impl Write) -> Result<(), CliError> {
    let config = load(path)?;
    let mut degenerate = Vec::new();
    for (tag, s) in scenarios(&config, list)? {
        let s = match ratio {
            Some(r) => s.with_hot_omega(r * s.cold().omega)?,
            None => s,
        };
        let ss = steady_state(&assemble(&s)?)?;
        let c = closed_form_currents(&ss.rho, &s)?;
        let report = classify_regime(&c, &s, config.run.eps);
        writeln!(out, "scenario {tag}: omega_h/omega_c = {}", s.hot().omega / s.cold().omega)?;
        for w in s.warnings() {
            writeln!(out, "  warning: {w}")?;
        }
        writeln!(
            out,
            "  steady state: residual {:.3e}, gap {:.3e}, sigma_max {:.3e}, purity {:.6}, min eigenvalue {:.3e}",
            ss.residual,
            ss.spectral_gap,
            ss.sigma_max,
            ss.rho.purity(),
            ss.rho.min_eigenvalue()
        )?;
        if ss.degenerate {
            writeln!(out, "  DEGENERATE kernel: the steady state is not unique")?;
            degenerate.push(tag.clone());
        }
        writeln!(out, "  {:<8} {:>14} {:>14} {:>14}", "", "local", "non-local", "total")?;
        for (name, l, n) in [
            ("W", c.w_loc, c.w_nonloc),
            ("Q_h", c.q_h_loc, c.q_h_nonloc),
            ("Q_c", c.q_c_loc, c.q_c_nonloc),
        ] {
            writeln!(out, "  {name:<8} {l:>14.6e} {n:>14.6e} {:>14.6e}", l + n)?;
        }
        writeln!(
            out,
            "  first-law residual {:.3e}, entropy production {:.6e}",
            c.first_law_residual(),
            c.entropy_production(s.hot().temperature, s.cold().temperature)
        )?;
        if s.n_sites() == 2 {
            let m = coherence_metrics(&ss.rho, &s)?;
            writeln!(
                out,
                "  coherence {}: C_loc {:.6e}, C_nonloc {:.6e}, factored {:.6e}",
                m.variant, m.c_loc, m.c_nonloc, m.c_nonloc_factored
            )?;
        }
        let fom = report.figure_of_merit.map_or("-".to_string(), |f| format!("{f:.6}"));
        writeln!(
            out,
            "  regime {:?} ({}), figure of merit {fom}, Carnot bound {:.6}",
            report.regime,
            report.regime.label(),
            report.carnot_bound
        )?;
    }
    if degenerate.is_empty() {
        Ok(())
    } else {
        Err(CliError::Degenerate(format!("degenerate kernel for {}", degenerate.join(", "))))
    }
}

pub fn sweep(
    path: &Path,
    list: Option<&str>,
    grid: Option<&str>,
    dir: &Path,
    plots: bool,
    out: &mut impl Write,
) -> Result<(), CliError> {
    let config = load(path)?;
    let grid: Grid = match grid {
        Some(g) => g.parse().map_err(|e: String| CliError::Invalid(format!("--grid: {e}")))?,
        None => config.run.grid.unwrap_or(Grid {
            lo: 0.1,
            hi: 3.5,
            step: 0.02,
        }),
    };
    let ratios = grid.points();
    let selected = scenarios(&config, list)?;
    std::fs::create_dir_all(dir)?;
    let mut summary = Vec::new();
    let mut curves = Vec::new();
    for (tag, s) in &selected {
        let points = run_sweep(s, &ratios, config.run.eps);
        output::write_sweep_csv(&dir.join(format!("sweep_{tag}.csv")), tag, &points)?;
        let flagged = points.iter().filter(|p| p.error.is_some()).count();
        writeln!(out, "{tag}: {} points -> sweep_{tag}.csv ({flagged} with errors)", points.len())?;
        let curve = engine_curve(&points);
        if !curve.is_empty() {
            let rows: Vec<Vec<f64>> = curve.iter().map(|&(eta, w)| vec![eta, w]).collect();
            output::write_dat(&dir.join(format!("power_efficiency_{tag}.dat")), &["eta", "w"], &rows)?;
        }
        if plots {
            output::write_dat(
                &dir.join(format!("currents_{tag}.dat")),
                &output::CURRENT_COLUMNS,
                &output::currents_table(&points),
            )?;
        }
        summary.push((tag.clone(), efficiency_at_max_power(&points).map_err(|e| e.to_string())));
        curves.push((tag.clone(), curve));
    }
    output::write_summary_csv(&dir.join("summary.csv"), &summary)?;
    if plots {
        let carnot = 1.0 - config.scenario.cold().temperature / config.scenario.hot().temperature;
        std::fs::write(dir.join("power_efficiency.svg"), output::power_efficiency_svg(&curves, carnot))?;
    }
    writeln!(out, "\nefficiency at maximum power")?;
    for (tag, r) in &summary {
        match r {
            Ok(m) => writeln!(
                out,
                "  {tag}: eta_max {:.4}, power {:.4e}, near omega_h/omega_c = {}",
                m.eta_max, m.power_max, m.ratio
            )?,
            Err(e) => writeln!(out, "  {tag}: {e}")?,
        }
    }
    Ok(())
}

fn relative(a: f64, reference: f64, scale: f64) -> f64 {
    (a - reference).abs() / scale
}

pub fn collision_check(path: &Path, list: Option<&str>, taus: Option<&str>, out: &mut impl Write) -> Result<(), CliError> {
    let config = load(path)?;
    let taus = match taus {
        Some(t) => tau_list(t)?,
        None => config.run.taus.clone(),
    };
    let mut distinct = taus.clone();
    distinct.sort_by(f64::total_cmp);
    distinct.dedup();
    if distinct.len() < 3 {
        return Err(CliError::Invalid(format!(
            "collision-check needs at least 3 distinct tau values, got {}",
            distinct.len()
        )));
    }
    let mut incomplete = Vec::new();
    for (tag, s) in scenarios(&config, list)? {
        let ss = steady_state(&assemble(&s)?)?;
        let qme = closed_form_currents(&ss.rho, &s)?;
        let reference = [qme.w(), qme.q_h(), qme.q_c()];
        let scale = reference.iter().fold(CURRENT_FLOOR, |m, v| m.max(v.abs()));
        writeln!(out, "scenario {tag}: omega_h/omega_c = {}, cascade time {}", s.hot().omega / s.cold().omega, config.run.cascade_time.name())?;
        if ss.degenerate {
            writeln!(out, "  note: master-equation kernel is degenerate (gap {:.3e})", ss.spectral_gap)?;
        }
        writeln!(out, "  {:>10} {:>8} {:>10} {:>16} {:>16} {:>16}", "tau", "steps", "converged", "W", "Q_h", "Q_c")?;
        let runs: Vec<(f64, Result<SteadyCycleResult, String>)> = distinct
            .par_iter()
            .map(|&t| (t, run_to_steady(&s, t, &config.run).map_err(|e| e.to_string())))
            .collect();
        let mut good = Vec::new();
        for (t, r) in &runs {
            match r {
                Ok(r) => {
                    let [w, qh, qc] = r.currents.components();
                    let flag = if r.converged { "yes" } else { "NO" };
                    writeln!(out, "  {t:>10} {:>8} {flag:>10} {w:>16.9e} {qh:>16.9e} {qc:>16.9e}", r.steps_used)?;
                    if r.converged {
                        good.push(r);
                    }
                }
                Err(e) => writeln!(out, "  {t:>10} failed: {e}")?,
            }
        }
        writeln!(out, "  {:>10} {:>8} {:>10} {:>16.9e} {:>16.9e} {:>16.9e}", "QME", "", "", reference[0], reference[1], reference[2])?;
        if good.len() < 3 {
            writeln!(out, "  extrapolation skipped: only {} converged runs", good.len())?;
            incomplete.push(tag);
            continue;
        }
        let x: Vec<f64> = good.iter().map(|r| r.tau).collect();
        let mut limit = [0.0; 3];
        let mut line = String::from("  tau -> 0");
        let mut dev = String::from("  relative deviation from QME");
        let mut order = String::from("  convergence order");
        for (c, name) in ["W", "Q_h", "Q_c"].iter().enumerate() {
            let y: Vec<f64> = good.iter().map(|r| r.currents.components()[c]).collect();
            limit[c] = linear_fit(&x, &y).0;
            line.push_str(&format!("  {name} {:.9e}", limit[c]));
            dev.push_str(&format!("  {name} {:.3e}", relative(limit[c], reference[c], scale)));
            let o = convergence_order(&x, &y, reference[c]).map_or("-".to_string(), |o| format!("{o:.3}"));
            order.push_str(&format!("  {name} {o}"));
        }
        writeln!(out, "{line}\n{dev}\n{order}")?;
    }
    if incomplete.is_empty() {
        Ok(())
    } else {
        Err(CliError::Failed(format!("collision runs did not converge for {}", incomplete.join(", "))))
    }
}
