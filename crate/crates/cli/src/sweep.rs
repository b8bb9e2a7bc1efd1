//! Mass-grid sweeps: one CSV row per instance of the Cartesian product
//! of the mass axes. Rows run in a parallel worker pool and land in
//! deterministic (row-major) order; per-row failures are recorded in
//! the `status` column without aborting the sweep.

use rayon::prelude::*;
use serde::Deserialize;

use sitnikov::{
    first_conjugate_point, jacobi_frequency, minimize, CircularConfig, MassSystem,
    MinimizeOptions, SymmetryClass,
};

use crate::json::csv_f64;
use crate::Failure;

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AxisSpec {
    pub min: f64,
    pub max: f64,
    pub count: usize,
    /// "log" (default) or "linear".
    pub spacing: Option<String>,
}

impl AxisSpec {
    fn values(&self) -> Result<Vec<f64>, Failure> {
        if !self.min.is_finite() || self.min <= 0.0 || !self.max.is_finite() || self.max < self.min {
            return Err(Failure::Usage(format!(
                "axis needs 0 < min <= max, got [{}, {}]",
                self.min, self.max
            )));
        }
        if self.count == 0 {
            return Err(Failure::Usage("axis count must be at least 1".into()));
        }
        let log = match self.spacing.as_deref() {
            None | Some("log") => true,
            Some("linear") => false,
            Some(other) => {
                return Err(Failure::Usage(format!(
                    "unknown spacing {other:?} (expected \"log\" or \"linear\")"
                )))
            }
        };
        if self.count == 1 {
            return Ok(vec![self.min]);
        }
        let n = self.count as f64 - 1.0;
        Ok((0..self.count)
            .map(|i| {
                let s = i as f64 / n;
                if log {
                    (self.min.ln() + s * (self.max.ln() - self.min.ln())).exp()
                } else {
                    self.min + s * (self.max - self.min)
                }
            })
            .collect())
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepGrid {
    /// One axis per primary; 2 or 3 axes.
    pub axes: Vec<AxisSpec>,
    /// Defaults to 2π.
    pub period: Option<f64>,
    /// "anti-half" (default) or "odd".
    pub class: Option<String>,
    pub modes: Option<usize>,
    pub gtol: Option<f64>,
    pub max_iter: Option<usize>,
    pub seed: Option<u64>,
    pub init_amplitude: Option<f64>,
}

pub struct SweepOutcome {
    pub csv: String,
    pub total_rows: usize,
    pub failed_rows: usize,
}

struct Row {
    masses: Vec<f64>,
    omega: f64,
    c: f64,
    margin: f64,
    rest_action: f64,
    min_action: f64,
    nontrivial: bool,
    status: String,
}

fn cartesian(axes: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let mut rows: Vec<Vec<f64>> = vec![Vec::new()];
    for axis in axes {
        let mut next = Vec::with_capacity(rows.len() * axis.len());
        for row in &rows {
            for &v in axis {
                let mut extended = row.clone();
                extended.push(v);
                next.push(extended);
            }
        }
        rows = next;
    }
    rows
}

fn jacobi_row(masses: &[f64], period: f64) -> Result<(f64, f64, f64), sitnikov::Error> {
    let system = MassSystem::new(masses.to_vec(), period)?;
    let config = CircularConfig::for_system(&system)?;
    let omega = jacobi_frequency(&system, &config);
    let c = first_conjugate_point(&system, &config)?;
    Ok((omega, c, period / (2.0 * c) - 1.0))
}

fn full_row(masses: Vec<f64>, period: f64, class: SymmetryClass, opts: MinimizeOptions) -> Row {
    let mut row = Row {
        masses,
        omega: f64::NAN,
        c: f64::NAN,
        margin: f64::NAN,
        rest_action: f64::NAN,
        min_action: f64::NAN,
        nontrivial: false,
        status: "ok".into(),
    };
    let attempt = (|| -> Result<(), sitnikov::Error> {
        let system = MassSystem::new(row.masses.clone(), period)?;
        let config = CircularConfig::for_system(&system)?;
        row.omega = jacobi_frequency(&system, &config);
        row.c = first_conjugate_point(&system, &config)?;
        row.margin = period / (2.0 * row.c) - 1.0;
        row.rest_action = period * config.axial_potential(&system, 0.0);
        let report = minimize(&system, class, &opts)?;
        row.min_action = report.action.value;
        row.nontrivial = report.nontrivial;
        if !report.converged {
            row.status = "unconverged".into();
        }
        Ok(())
    })();
    if let Err(err) = attempt {
        // Keep the CSV single-line per row.
        row.status = err.to_string().replace([',', '\n'], ";");
    }
    row
}

pub fn run(grid: &SweepGrid, jacobi_only: bool) -> Result<SweepOutcome, Failure> {
    let n = grid.axes.len();
    if n != 2 && n != 3 {
        return Err(Failure::Usage(format!(
            "sweep needs one axis per primary (2 or 3), got {n}"
        )));
    }
    let period = grid.period.unwrap_or(std::f64::consts::TAU);
    if !period.is_finite() || period <= 0.0 {
        return Err(Failure::Usage(format!("period must be positive, got {period}")));
    }
    let class: SymmetryClass = match grid.class.as_deref() {
        None | Some("anti-half") => SymmetryClass::AntiHalfPeriod,
        Some("odd") => SymmetryClass::Odd,
        Some(other) => {
            return Err(Failure::Usage(format!(
                "unknown symmetry class {other:?} (expected \"anti-half\" or \"odd\")"
            )))
        }
    };
    let axes: Vec<Vec<f64>> = grid
        .axes
        .iter()
        .map(AxisSpec::values)
        .collect::<Result<_, _>>()?;
    let instances = cartesian(&axes);
    let base_seed = grid.seed.unwrap_or(0);

    let mass_header: Vec<String> = (1..=n).map(|i| format!("m{i}")).collect();
    let mut csv = String::new();

    if jacobi_only {
        csv.push_str(&format!("{},omega,c,margin\n", mass_header.join(",")));
        type JacobiRow = (Vec<f64>, Result<(f64, f64, f64), sitnikov::Error>);
        let rows: Vec<JacobiRow> = instances
            .into_par_iter()
            .map(|masses| {
                let result = jacobi_row(&masses, period);
                (masses, result)
            })
            .collect();
        let total_rows = rows.len();
        let mut failed_rows = 0;
        for (masses, result) in rows {
            let masses_csv: Vec<String> = masses.iter().map(|m| csv_f64(*m)).collect();
            match result {
                Ok((omega, c, margin)) => csv.push_str(&format!(
                    "{},{},{},{}\n",
                    masses_csv.join(","),
                    csv_f64(omega),
                    csv_f64(c),
                    csv_f64(margin),
                )),
                Err(_) => {
                    failed_rows += 1;
                    csv.push_str(&format!("{},nan,nan,nan\n", masses_csv.join(",")));
                }
            }
        }
        return Ok(SweepOutcome {
            csv,
            total_rows,
            failed_rows,
        });
    }

    csv.push_str(&format!(
        "{},omega,c,margin,f0,f_star,nontrivial,status\n",
        mass_header.join(",")
    ));
    let rows: Vec<Row> = instances
        .into_par_iter()
        .enumerate()
        .map(|(idx, masses)| {
            let opts = MinimizeOptions {
                modes: grid.modes.unwrap_or(32),
                gtol: grid.gtol.unwrap_or(1e-9),
                max_iter: grid.max_iter.unwrap_or(1000),
                seed: base_seed.wrapping_add(idx as u64),
                init_amplitude: grid.init_amplitude,
                ..Default::default()
            };
            full_row(masses, period, class, opts)
        })
        .collect();

    let total_rows = rows.len();
    let mut failed_rows = 0;
    for row in &rows {
        if row.status != "ok" {
            failed_rows += 1;
        }
        let masses_csv: Vec<String> = row.masses.iter().map(|m| csv_f64(*m)).collect();
        csv.push_str(&format!(
            "{},{},{},{},{},{},{},{}\n",
            masses_csv.join(","),
            csv_f64(row.omega),
            csv_f64(row.c),
            csv_f64(row.margin),
            csv_f64(row.rest_action),
            csv_f64(row.min_action),
            row.nontrivial,
            row.status,
        ));
    }
    Ok(SweepOutcome {
        csv,
        total_rows,
        failed_rows,
    })
}
