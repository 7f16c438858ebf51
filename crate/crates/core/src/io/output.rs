//! Deterministic CSV tables. Numbers use 12 significant digits in scientific
//! notation, holes are written as `NA` with the reason in the `flag` column.

use std::io;
use std::path::Path;

use crate::models::to_mhz;
use crate::solvers::{States, Trajectory};
use crate::sweep::{ComparisonTable, Objective, Optimum, ParamName, Protocol, SweepResult};

use super::config::external_key;

pub const NA: &str = "NA";

pub fn fmt_num(v: f64) -> String {
    format!("{v:.11e}")
}

fn fmt_opt(v: Option<f64>) -> String {
    v.filter(|x| x.is_finite()).map_or_else(|| NA.to_string(), fmt_num)
}

/// Internal value of `p` in its external unit.
fn external_value(p: ParamName, v: f64) -> f64 {
    if p.is_rate() {
        to_mhz(v)
    } else {
        v
    }
}

fn render(header: &[String], rows: &[Vec<String>]) -> String {
    let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(Vec::new());
    w.write_record(header).expect("in-memory write");
    for r in rows {
        w.write_record(r).expect("in-memory write");
    }
    String::from_utf8(w.into_inner().expect("in-memory flush")).expect("utf-8 fields")
}

/// Time series: t_ns, then re/im of every amplitude (conditional) or every
/// population (master), then norm_sq, P_L, P_R, P_spont.
pub fn trajectory_csv(traj: &Trajectory) -> String {
    let labels: Vec<String> =
        traj.basis.states().iter().map(|s| format!("{}_{}_{}", s.level.label(), s.n_l, s.n_r)).collect();
    let mut header = vec!["t_ns".to_string()];
    match &traj.states {
        States::Vectors(_) => {
            for l in &labels {
                header.push(format!("re_{l}"));
                header.push(format!("im_{l}"));
            }
        }
        States::Densities(_) => header.extend(labels.iter().map(|l| format!("pop_{l}"))),
    }
    header.extend(["norm_sq", "P_L", "P_R", "P_spont"].map(String::from));

    let rows: Vec<Vec<String>> = (0..traj.len())
        .map(|k| {
            let mut row = vec![fmt_num(traj.times[k])];
            match &traj.states {
                States::Vectors(v) => {
                    for a in v[k].amplitudes().iter() {
                        row.push(fmt_num(a.re));
                        row.push(fmt_num(a.im));
                    }
                }
                States::Densities(r) => {
                    let m = r[k].matrix();
                    row.extend((0..m.nrows()).map(|i| fmt_num(m[(i, i)].re)));
                }
            }
            row.push(fmt_num(traj.norm_sqr(k)));
            row.push(fmt_num(traj.emitted_l[k]));
            row.push(fmt_num(traj.emitted_r[k]));
            row.push(fmt_num(traj.spontaneous[k]));
            row
        })
        .collect();
    render(&header, &rows)
}

/// One row per grid point: axis values, optimized inner parameters, the
/// objective, its readout time and the flag column. Rates are in MHz.
pub fn sweep_csv(result: &SweepResult) -> String {
    let mut header: Vec<String> = result.axes.iter().map(|p| external_key(*p)).collect();
    header.extend(result.inner.iter().map(|p| format!("best_{}", external_key(*p))));
    header.extend([result.objective.key().to_string(), "t_eval_ns".into(), "flag".into()]);
    let rows: Vec<Vec<String>> = result
        .points
        .iter()
        .map(|pt| {
            let mut row: Vec<String> =
                result.axes.iter().zip(&pt.coords).map(|(p, v)| fmt_num(external_value(*p, *v))).collect();
            row.extend(result.inner.iter().zip(&pt.argmax).map(|(p, v)| fmt_opt(Some(external_value(*p, *v)))));
            row.push(fmt_opt(pt.value));
            row.push(fmt_opt(pt.t_eval));
            row.push(pt.flags.join("; "));
            row
        })
        .collect();
    render(&header, &rows)
}

pub fn optimum_csv(objective: Objective, opt: &Optimum) -> String {
    let mut header: Vec<String> = opt.argmax.iter().map(|(p, _)| external_key(*p)).collect();
    header.extend([objective.key().into(), "t_eval_ns".into(), "evaluations".into(), "iterations".into()]);
    let mut row: Vec<String> = opt.argmax.iter().map(|(p, v)| fmt_num(external_value(*p, *v))).collect();
    row.extend([fmt_num(opt.value), fmt_opt(opt.t_eval), opt.evaluations.to_string(), opt.iterations.to_string()]);
    render(&header, &[row])
}

/// κ/γ, then one value column per (objective, protocol), then the optimizer's
/// argmax for each cell and a combined flag column.
pub fn comparison_csv(table: &ComparisonTable) -> String {
    let protocols = [Protocol::ConstantRaman, Protocol::AdiabaticRamp];
    let cells: Vec<(Objective, Protocol)> = table.objectives.iter().flat_map(|&o| protocols.map(|p| (o, p))).collect();
    // Argmax columns follow the first row that has them; every row optimizes the same parameters.
    let params = |o: Objective, p: Protocol| -> Vec<ParamName> {
        table
            .rows
            .iter()
            .find_map(|r| r.cell(p, o).and_then(|c| c.optimum.as_ref()))
            .map(|opt| opt.argmax.iter().map(|(n, _)| *n).collect())
            .unwrap_or_default()
    };

    let mut header = vec!["kappa_over_gamma".to_string()];
    header.extend(cells.iter().map(|(o, p)| format!("{}_{}", p.key(), o.key())));
    for &(o, p) in &cells {
        header.extend(params(o, p).iter().map(|n| format!("{}_{}_{}", p.key(), o.key(), external_key(*n))));
    }
    header.push("flag".into());

    let rows: Vec<Vec<String>> = table
        .rows
        .iter()
        .map(|r| {
            let mut row = vec![fmt_num(r.kappa_over_gamma)];
            row.extend(cells.iter().map(|&(o, p)| fmt_opt(r.cell(p, o).and_then(|c| c.value()))));
            let mut flags = Vec::new();
            for &(o, p) in &cells {
                let cell = r.cell(p, o);
                for n in params(o, p) {
                    let v = cell.and_then(|c| c.optimum.as_ref()).and_then(|opt| opt.get(n));
                    row.push(fmt_opt(v.map(|v| external_value(n, v))));
                }
                if let Some(flag) = cell.and_then(|c| c.flag.as_ref()) {
                    flags.push(format!("{}_{}: {flag}", p.key(), o.key()));
                }
            }
            row.push(flags.join("; "));
            row
        })
        .collect();
    render(&header, &rows)
}

/// Write through a temporary file in the target directory and rename it into place.
pub fn write_atomic(path: &Path, contents: &str) -> io::Result<()> {
    use std::io::Write;
    let dir = match path.parent() {
        Some(d) if !d.as_os_str().is_empty() => d,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
    tmp.write_all(contents.as_bytes())?;
    tmp.as_file().sync_all()?;
    tmp.persist(path).map_err(|e| e.error)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exec::Execution;
    use crate::models::{mhz, ModelConfig, Pulse, RamanDetuning};
    use crate::solvers::{integrate, IntegrationSpec, Solver};
    use crate::sweep::{grid_sweep, Axis, SweepSpec};

    #[test]
    fn number_format_has_twelve_digits() {
        assert_eq!(fmt_num(0.5), "5.00000000000e-1");
        assert_eq!(fmt_num(-1234.5), "-1.23450000000e3");
        assert_eq!(fmt_opt(None), "NA");
        assert_eq!(fmt_opt(Some(f64::NAN)), "NA");
    }

    #[test]
    fn trajectory_columns_follow_model() {
        let c = ModelConfig::headline();
        let spec = IntegrationSpec::for_config(&c).unwrap().with_records(20);
        let dim = c.basis().unwrap().dim();
        let cond = trajectory_csv(&integrate(&c, &spec, Solver::Conditional).unwrap());
        let header = cond.lines().next().unwrap();
        assert!(header.starts_with("t_ns,re_g1_0_0,im_g1_0_0,"));
        assert!(header.ends_with("norm_sq,P_L,P_R,P_spont"));
        let cols = header.split(',').count();
        assert_eq!(cols, 1 + 2 * dim + 4);
        assert!(cond.lines().all(|l| l.split(',').count() == cols));
        assert!(cond.ends_with('\n'));

        let master = trajectory_csv(&integrate(&c, &spec, Solver::Master).unwrap());
        let header = master.lines().next().unwrap();
        assert!(header.starts_with("t_ns,pop_g1_0_0,"));
        assert_eq!(header.split(',').count(), 1 + dim + 4);
    }

    #[test]
    fn sweep_holes_are_na() {
        let gamma = mhz(20.0);
        let base = ModelConfig::three_level_raman(
            5.0 * gamma,
            gamma,
            gamma,
            50.0 * gamma,
            RamanDetuning::StarkCompensated,
            Pulse::constant(10.0 * gamma),
        );
        let spec =
            SweepSpec::new(base, vec![Axis::new(ParamName::Omega0, vec![0.0, mhz(200.0)])], Objective::SuccessRate);
        let text = sweep_csv(&grid_sweep(&spec, Execution::Sequential).unwrap());
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], "omega0_mhz,success_rate,t_eval_ns,flag");
        assert!(lines[1].starts_with("0.00000000000e0,NA,NA,"));
        assert!(lines[1].len() > "0.00000000000e0,NA,NA,".len());
        assert!(lines[2].starts_with("2.00000000000e2,") && lines[2].ends_with(','));
    }

    #[test]
    fn atomic_write_replaces_file() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("out.csv");
        write_atomic(&path, "a\n").unwrap();
        write_atomic(&path, "b\n").unwrap();
        assert_eq!(std::fs::read_to_string(&path).unwrap(), "b\n");
        assert_eq!(std::fs::read_dir(dir.path()).unwrap().count(), 1);
    }
}
