//! Subcommand definitions and drivers.

use std::path::PathBuf;
use std::time::Instant;

use adiabatic_core::nstate::{self, NStateModel};
use adiabatic_core::twostate::{self, TwoStateModel};
use adiabatic_core::C64;
use clap::{Args, Parser, Subcommand};
use rayon::prelude::*;

use crate::error::CliError;
use crate::generator::{self, GenParams};
use crate::model_file::{self, ModelFile, NStateSpec, TwoStateSpec};
use crate::report::{self, Cell, Column, Format, Method, RunReport, Table};

#[derive(Debug, Parser)]
#[command(name = "adiabatic-lab", version, about = "Adiabatic switching experiments for two-state and N-state models")]
pub struct Cli {
    #[command(subcommand)]
    pub family: Family,
}

#[derive(Debug, Subcommand)]
pub enum Family {
    /// Two-level model H = diag(μ−δ, μ+δ) + x e^{εt} σx.
    #[command(subcommand)]
    TwoState(TwoStateCmd),
    /// Finite spectrum H = H₀ + x e^{εt} V.
    #[command(subcommand)]
    NState(NStateCmd),
}

#[derive(Debug, Clone, Args)]
pub struct Output {
    /// Output file; stdout when omitted.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
    /// Record wall-clock time in the report (makes output run-dependent).
    #[arg(long)]
    pub timing: bool,
}

/// Two-state parameters: a model file, flags, or both (flags win).
#[derive(Debug, Clone, Args)]
pub struct TwoStateModelArgs {
    #[arg(long)]
    pub model: Option<PathBuf>,
    #[arg(long, allow_hyphen_values = true)]
    pub mu: Option<f64>,
    #[arg(long)]
    pub delta: Option<f64>,
    #[arg(long)]
    pub x: Option<f64>,
    #[arg(long)]
    pub eps: Option<f64>,
}

#[derive(Debug, Clone, Args)]
pub struct OdeArgs {
    #[arg(long, default_value_t = 1e-10)]
    pub tol: f64,
    #[arg(long, default_value_t = twostate::DEFAULT_START_THRESHOLD)]
    pub start_threshold: f64,
}

#[derive(Debug, Subcommand)]
pub enum TwoStateCmd {
    /// Exact eigensystem of the static Hamiltonian.
    Exact {
        #[command(flatten)]
        model: TwoStateModelArgs,
        #[command(flatten)]
        output: Output,
    },
    /// Interaction-picture (a, c) trajectory from the far past to --t-end.
    Evolve {
        #[command(flatten)]
        model: TwoStateModelArgs,
        #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
        t_end: f64,
        #[command(flatten)]
        ode: OdeArgs,
        #[command(flatten)]
        output: Output,
    },
    /// Divergent Bessel series for a(t) with its term magnitudes.
    Series {
        #[command(flatten)]
        model: TwoStateModelArgs,
        #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
        t: f64,
        /// Maximum number of terms.
        #[arg(long, default_value_t = 60)]
        terms: usize,
        /// Stop once a term falls below this magnitude.
        #[arg(long, default_value_t = 1e-12)]
        term_tol: f64,
        #[command(flatten)]
        output: Output,
    },
    /// Phase split F_a, ΔE, F_b, F_c and the normalization identity.
    Phase {
        #[command(flatten)]
        model: TwoStateModelArgs,
        #[arg(long, default_value_t = twostate::DEFAULT_ORDER)]
        order: usize,
        #[arg(long, default_value_t = twostate::DEFAULT_JET_ORDER)]
        jet_order: usize,
        #[command(flatten)]
        output: Output,
    },
    /// a(t) from ODE, Bessel series and phase recursion with cross residuals.
    Compare {
        #[command(flatten)]
        model: TwoStateModelArgs,
        /// Comma-separated times.
        #[arg(long, value_delimiter = ',', default_value = "0", allow_hyphen_values = true)]
        t: Vec<f64>,
        #[arg(long, default_value_t = twostate::DEFAULT_ORDER)]
        order: usize,
        #[arg(long, default_value_t = 60)]
        terms: usize,
        #[command(flatten)]
        ode: OdeArgs,
        /// Agreement threshold for the verdict column.
        #[arg(long, default_value_t = 1e-6)]
        agree: f64,
        #[command(flatten)]
        output: Output,
    },
    /// Compare over a geometric ε grid with divergence/boundedness verdicts.
    SweepEps {
        #[command(flatten)]
        model: TwoStateModelArgs,
        /// start:factor:count
        #[arg(long, default_value = "0.5:0.5:4")]
        eps_grid: String,
        #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
        t: f64,
        #[arg(long, default_value_t = twostate::DEFAULT_ORDER)]
        order: usize,
        #[arg(long, default_value_t = 60)]
        terms: usize,
        #[command(flatten)]
        ode: OdeArgs,
        #[command(flatten)]
        output: Output,
    },
}

#[derive(Debug, Clone, Args)]
pub struct NStateModelArgs {
    #[arg(long)]
    pub model: PathBuf,
    /// Override the file's coupling.
    #[arg(long)]
    pub x: Option<f64>,
    /// Override the file's switching rate.
    #[arg(long)]
    pub eps: Option<f64>,
}

#[derive(Debug, Subcommand)]
pub enum NStateCmd {
    /// Second-order Dyson vector at finite ε.
    Dyson {
        #[command(flatten)]
        model: NStateModelArgs,
        #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
        t: f64,
        #[command(flatten)]
        output: Output,
    },
    /// ξ_n and |φ_n⟩ from the projector recursion, expanded at ε = 0.
    Recursion {
        #[command(flatten)]
        model: NStateModelArgs,
        #[arg(long, default_value_t = 8)]
        order: usize,
        #[arg(long, default_value_t = nstate::DEFAULT_JET_ORDER)]
        jet_order: usize,
        #[command(flatten)]
        output: Output,
    },
    /// G_a, ΔE, G_b split of the accumulated phase.
    Split {
        #[command(flatten)]
        model: NStateModelArgs,
        #[arg(long, default_value_t = 8)]
        order: usize,
        #[command(flatten)]
        output: Output,
    },
    /// ε → 0 state e^{G_b}(|0⟩ + Σ xⁿ|φ_n⟩).
    Assemble {
        #[command(flatten)]
        model: NStateModelArgs,
        #[arg(long, default_value_t = 8)]
        order: usize,
        #[command(flatten)]
        output: Output,
    },
    /// Schrödinger-picture trajectory from |0⟩.
    Evolve {
        #[command(flatten)]
        model: NStateModelArgs,
        #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
        t_end: f64,
        #[command(flatten)]
        ode: OdeArgs,
        #[command(flatten)]
        output: Output,
    },
    /// Exact shift of the continued level by diagonalization.
    Oracle {
        #[command(flatten)]
        model: NStateModelArgs,
        #[command(flatten)]
        output: Output,
    },
    /// Series shift vs oracle, and component ratios from ODE, recursion and oracle.
    Compare {
        #[command(flatten)]
        model: NStateModelArgs,
        #[arg(long, default_value_t = 8)]
        order: usize,
        #[command(flatten)]
        ode: OdeArgs,
        #[command(flatten)]
        output: Output,
    },
    /// Write a seeded random Hermitian model file.
    Gen {
        #[arg(long)]
        seed: u64,
        #[arg(long, default_value_t = 6)]
        levels: usize,
        /// Minimum level spacing; spacings are gap·(1 + u), u ∈ [0, 1).
        #[arg(long, default_value_t = 1.0)]
        gap: f64,
        #[arg(long, default_value_t = 1.0)]
        vscale: f64,
        #[arg(long, default_value_t = 0.05)]
        x: f64,
        #[arg(long, default_value_t = 0.1)]
        eps: f64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

const SIGN_NOTE: &str = "sign convention: xi_n = <0|V|phi_(n-1)> with phi_1 = -R_1 Q V|0>, so xi_2(0) = -sum |V_n0|^2/(E_n - E_0); see README, 'Sign conventions'";

/// Run a parsed command line, writing its output.
pub fn execute(cli: &Cli, argv: Vec<String>) -> Result<(), CliError> {
    let started = Instant::now();
    let (report, output) = match &cli.family {
        Family::TwoState(cmd) => two_state(cmd, argv)?,
        Family::NState(NStateCmd::Gen { seed, levels, gap, vscale, x, eps, out }) => {
            let text = gen_model(*seed, *levels, *gap, *vscale, *x, *eps)?;
            return write_out(out.as_ref(), &text);
        }
        Family::NState(cmd) => n_state(cmd, argv)?,
    };
    let mut report = report;
    if output.timing {
        report.timing = Some(report::Timing { wall_seconds: started.elapsed().as_secs_f64() });
    }
    for flag in &report.flags {
        log::warn!("{}: {}", flag.name, flag.message);
    }
    for note in &report.notes {
        eprintln!("note: {note}");
    }
    write_out(output.out.as_ref(), &report::render(&report, output.format))
}

fn write_out(path: Option<&PathBuf>, text: &str) -> Result<(), CliError> {
    use std::io::Write;
    match path {
        Some(p) => std::fs::write(p, text).map_err(|e| CliError::Io { path: p.display().to_string(), source: e }),
        None => std::io::stdout()
            .write_all(text.as_bytes())
            .map_err(|e| CliError::Io { path: "<stdout>".into(), source: e }),
    }
}

pub fn gen_model(seed: u64, levels: usize, gap: f64, vscale: f64, x: f64, eps: f64) -> Result<String, CliError> {
    if levels < 1 {
        return Err(CliError::Usage("--levels must be at least 1".into()));
    }
    if !(gap > 0.0 && gap.is_finite()) || !vscale.is_finite() {
        return Err(CliError::Usage("--gap must be > 0 and --vscale finite".into()));
    }
    let spec = generator::generate(&GenParams { seed, levels, gap, vscale, x, eps });
    // validate before writing
    spec.build()?;
    Ok(model_file::to_text(&ModelFile::NState(spec)))
}

fn two_state_model(a: &TwoStateModelArgs, need_eps: bool) -> Result<TwoStateModel, CliError> {
    let file = match &a.model {
        Some(p) => match model_file::load(p)? {
            ModelFile::TwoState(s) => Some(s),
            ModelFile::NState(_) => {
                return Err(CliError::Model { source_name: p.display().to_string(), message: "expected kind \"two-state\"".into() })
            }
        },
        None => None,
    };
    let pick = |flag: Option<f64>, from_file: Option<f64>, name: &str| -> Result<f64, CliError> {
        flag.or(from_file).ok_or_else(|| CliError::Usage(format!("--{name} is required (or give --model)")))
    };
    let eps = match (a.eps, file.as_ref().map(|f| f.eps)) {
        (Some(e), _) | (None, Some(e)) => e,
        (None, None) if need_eps => return Err(CliError::Usage("--eps is required (or give --model)".into())),
        // ε does not enter the static quantities; any positive value works
        (None, None) => 0.1,
    };
    let spec = TwoStateSpec {
        mu: a.mu.or(file.as_ref().map(|f| f.mu)).unwrap_or(0.0),
        delta: pick(a.delta, file.as_ref().map(|f| f.delta), "delta")?,
        x: pick(a.x, file.as_ref().map(|f| f.x), "x")?,
        eps,
    };
    spec.build()
}

fn two_state_params(r: &mut RunReport, m: &TwoStateModel) {
    r.param("mu", m.mu());
    r.param("delta", m.delta());
    r.param("x", m.x());
    r.param("eps", m.eps());
}

fn two_state(cmd: &TwoStateCmd, argv: Vec<String>) -> Result<(RunReport, Output), CliError> {
    let mut r = RunReport::new(argv);
    let output = match cmd {
        TwoStateCmd::Exact { model, output } => {
            let m = two_state_model(model, false)?;
            two_state_params(&mut r, &m);
            let es = twostate::exact_eigensystem(&m);
            let mut t = Table::new(
                "eigensystem",
                ["e0", "e1", "delta_e", "norm_n"]
                    .iter()
                    .map(|n| Column::real(n, Method::Oracle))
                    .chain(["psi0_0", "psi0_1", "psi1_0", "psi1_1"].iter().map(|n| Column::complex(n, Method::Oracle)))
                    .collect(),
            );
            t.push(vec![
                Cell::real(es.e0),
                Cell::real(es.e1),
                Cell::real(es.delta_e),
                Cell::real(es.norm_n),
                Cell::complex(es.psi0[0]),
                Cell::complex(es.psi0[1]),
                Cell::complex(es.psi1[0]),
                Cell::complex(es.psi1[1]),
            ]);
            r.tables.push(t);
            output
        }
        TwoStateCmd::Evolve { model, t_end, ode, output } => {
            let m = two_state_model(model, true)?;
            two_state_params(&mut r, &m);
            r.param("t_end", *t_end);
            r.param("tol", ode.tol);
            r.param("start_threshold", ode.start_threshold);
            log::info!("evolving two-state model to t = {t_end}");
            let tr = twostate::evolve_two_state(&m, *t_end, ode.tol, ode.start_threshold)?;
            r.param("t_start", tr.times[0]);
            r.param("accepted_steps", tr.accepted_steps);
            r.param("rejected_steps", tr.rejected_steps);
            let mut t = Table::new(
                "trajectory",
                vec![Column::input("t"), Column::complex("a", Method::Ode), Column::complex("c", Method::Ode), Column::real("norm", Method::Ode)],
            );
            for (time, s) in tr.times.iter().zip(&tr.states) {
                let norm = (s[0].norm_sqr() + s[1].norm_sqr()).sqrt();
                t.push(vec![Cell::real(*time), Cell::complex(s[0]), Cell::complex(s[1]), Cell::real(norm)]);
            }
            r.tables.push(t);
            output
        }
        TwoStateCmd::Series { model, t, terms, term_tol, output } => {
            let m = two_state_model(model, true)?;
            two_state_params(&mut r, &m);
            r.param("t", *t);
            r.param("terms", *terms);
            r.param("term_tol", *term_tol);
            let b = twostate::bessel_series_a_to_tol(&m, *t, *term_tol, *terms);
            if !b.converged {
                r.flag("bessel-series", if b.overflowed { "term magnitude overflowed" } else { "not converged within the term limit" });
            }
            let mut v = Table::new(
                "value",
                vec![Column::complex("a", Method::BesselSeries), Column::real("max_term", Method::BesselSeries), Column::text("converged")],
            );
            v.push(vec![Cell::complex(b.value), Cell::real(b.max_term()), Cell::text(b.converged.to_string())]);
            let mut terms_t = Table::new("terms", vec![Column::input("k"), Column::real("magnitude", Method::BesselSeries)]);
            for (k, mag) in b.term_magnitudes.iter().enumerate() {
                terms_t.push(vec![Cell::index(k + 1), Cell::real(*mag)]);
            }
            r.tables.push(v);
            r.tables.push(terms_t);
            output
        }
        TwoStateCmd::Phase { model, order, jet_order, output } => {
            let m = two_state_model(model, false)?;
            two_state_params(&mut r, &m);
            r.param("order", *order);
            r.param("jet_order", *jet_order);
            let s = twostate::phase_split_with(&m, *order, *jet_order)?;
            let fb = twostate::fb_identity_check(m.delta(), m.x(), *order)?;
            let mut t = Table::new(
                "split",
                ["f_a", "delta_e_a", "f_b", "exp_f_b", "imag_residue"]
                    .iter()
                    .map(|n| Column::real(n, Method::PhaseRecursion))
                    .chain(["f_c_jet", "f_c_exact"].iter().map(|n| Column::complex(n, Method::PhaseRecursion)))
                    .collect(),
            );
            t.push(vec![
                Cell::real(s.f_a),
                Cell::real(s.delta_e_a),
                Cell::real(s.f_b),
                Cell::real(s.f_b.exp()),
                Cell::real(s.imag_residue),
                Cell::complex(s.f_c_jet),
                Cell::complex(s.f_c_exact),
            ]);
            let mut id = Table::new(
                "fb_identity",
                vec![
                    Column::real("lhs", Method::PhaseRecursion),
                    Column::real("rhs", Method::Oracle),
                    Column::residual("residual", Method::PhaseRecursion, Method::Oracle),
                    Column::real("quadratic_residual", Method::PhaseRecursion),
                    Column::real("first_order_residual", Method::PhaseRecursion),
                ],
            );
            id.push(vec![
                Cell::real(fb.lhs),
                Cell::real(fb.rhs),
                Cell::real(fb.residual),
                Cell::real(fb.quadratic_residual),
                Cell::real(fb.first_order_residual),
            ]);
            r.tables.push(t);
            r.tables.push(id);
            output
        }
        TwoStateCmd::Compare { model, t, order, terms, ode, agree, output } => {
            let m = two_state_model(model, true)?;
            two_state_params(&mut r, &m);
            r.param("t", t.clone());
            r.param("order", *order);
            r.param("terms", *terms);
            r.param("tol", ode.tol);
            r.param("start_threshold", ode.start_threshold);
            r.param("agree", *agree);
            let rows = t
                .par_iter()
                .map(|&time| compare_point(&m, time, *order, *terms, ode))
                .collect::<Result<Vec<_>, _>>()?;
            let mut tab = Table::new("compare", compare_columns(false));
            let mut worst: f64 = 0.0;
            for (time, p) in t.iter().zip(&rows) {
                worst = worst.max(p.max_residual());
                tab.push(p.cells(Cell::real(*time)));
                if !p.bessel_converged {
                    r.flag("bessel-series", format!("not converged at t = {time}"));
                }
            }
            r.tables.push(tab);
            r.tables.push(verdicts(vec![(
                "three_way_agreement",
                worst.is_finite() && worst <= *agree,
                format!("max residual {worst:e} vs {agree:e}"),
            )]));
            output
        }
        TwoStateCmd::SweepEps { model, eps_grid, t, order, terms, ode, output } => {
            let m = two_state_model(model, false)?;
            let grid = parse_grid(eps_grid)?;
            r.param("mu", m.mu());
            r.param("delta", m.delta());
            r.param("x", m.x());
            r.param("eps_grid", eps_grid.as_str());
            r.param("t", *t);
            r.param("order", *order);
            r.param("terms", *terms);
            r.param("tol", ode.tol);
            r.param("start_threshold", ode.start_threshold);
            let norm_n = twostate::exact_eigensystem(&m).norm_n;
            r.param("norm_n", norm_n);
            let rows = grid
                .par_iter()
                .map(|&eps| {
                    log::info!("sweep point eps = {eps}");
                    compare_point(&m.with_eps(eps)?, *t, *order, *terms, ode)
                })
                .collect::<Result<Vec<_>, CliError>>()?;
            let mut tab = Table::new("sweep", compare_columns(true));
            for (eps, p) in grid.iter().zip(&rows) {
                let mut cells = p.cells(Cell::real(*eps));
                cells.push(Cell::real(p.max_term));
                cells.push(Cell::real(p.ode.norm()));
                cells.push(Cell::real((p.ode.norm() - norm_n).abs()));
                tab.push(cells);
            }
            r.tables.push(tab);
            r.tables.push(verdicts(sweep_verdicts(&grid, &rows, norm_n, ode.tol)));
            output
        }
    };
    Ok((r, output.clone()))
}

struct ComparePoint {
    ode: C64,
    bessel: C64,
    phase: C64,
    max_term: f64,
    bessel_converged: bool,
}

impl ComparePoint {
    fn residuals(&self) -> [f64; 3] {
        [(self.ode - self.bessel).norm(), (self.ode - self.phase).norm(), (self.bessel - self.phase).norm()]
    }

    fn max_residual(&self) -> f64 {
        // NaN from an overflowed series must not pass as agreement
        self.residuals().iter().fold(0.0, |acc: f64, r| if r.is_nan() { f64::INFINITY } else { acc.max(*r) })
    }

    fn cells(&self, lead: Cell) -> Vec<Cell> {
        let [r1, r2, r3] = self.residuals();
        vec![
            lead,
            Cell::complex(self.ode),
            Cell::complex(self.bessel),
            Cell::complex(self.phase),
            Cell::real(r1),
            Cell::real(r2),
            Cell::real(r3),
        ]
    }
}

fn compare_columns(sweep: bool) -> Vec<Column> {
    let mut cols = vec![
        Column::input(if sweep { "eps" } else { "t" }),
        Column::complex("a_ode", Method::Ode),
        Column::complex("a_bessel", Method::BesselSeries),
        Column::complex("a_phase", Method::PhaseRecursion),
        Column::residual("res_ode_bessel", Method::Ode, Method::BesselSeries),
        Column::residual("res_ode_phase", Method::Ode, Method::PhaseRecursion),
        Column::residual("res_bessel_phase", Method::BesselSeries, Method::PhaseRecursion),
    ];
    if sweep {
        cols.push(Column::real("max_term", Method::BesselSeries));
        cols.push(Column::real("abs_a_ode", Method::Ode));
        cols.push(Column::residual("err_abs_a_vs_norm_n", Method::Ode, Method::Oracle));
    }
    cols
}

fn compare_point(m: &TwoStateModel, t: f64, order: usize, terms: usize, ode: &OdeArgs) -> Result<ComparePoint, CliError> {
    let tr = twostate::evolve_two_state(m, t, ode.tol, ode.start_threshold)?;
    let b = twostate::bessel_series_a_to_tol(m, t, 1e-12, terms);
    // the phase route needs x < δ; outside it the column is left empty
    let phase = if m.x() < m.delta() { twostate::a_from_phase(m, t, order)? } else { C64::new(f64::NAN, f64::NAN) };
    Ok(ComparePoint { ode: tr.final_state()[0], bessel: b.value, phase, max_term: b.max_term(), bessel_converged: b.converged })
}

fn verdicts(items: Vec<(&str, bool, String)>) -> Table {
    let mut t = Table::new("verdicts", vec![Column::text("check"), Column::text("verdict"), Column::text("detail")]);
    for (name, pass, detail) in items {
        t.push(vec![Cell::text(name), Cell::text(if pass { "pass" } else { "fail" }), Cell::text(detail)]);
    }
    t
}

/// Verdicts over the grid sorted by decreasing ε.
fn sweep_verdicts(grid: &[f64], rows: &[ComparePoint], norm_n: f64, tol: f64) -> Vec<(&'static str, bool, String)> {
    let mut idx: Vec<usize> = (0..grid.len()).collect();
    idx.sort_by(|&a, &b| grid[b].total_cmp(&grid[a]));
    let terms: Vec<f64> = idx.iter().map(|&i| rows[i].max_term).collect();
    let errs: Vec<f64> = idx.iter().map(|&i| (rows[i].ode.norm() - norm_n).abs()).collect();
    let growth = terms.windows(2).map(|w| w[1] / w[0]).fold(f64::INFINITY, f64::min);
    let increasing = terms.windows(2).all(|w| w[1] > w[0]);
    let decreasing = errs.windows(2).all(|w| w[1] < w[0]);
    let bounded = idx.iter().all(|&i| rows[i].ode.norm() <= 1.0 + 100.0 * tol);
    vec![
        ("max_term_increasing", increasing, format!("smallest ratio between neighbours {growth:.6e}")),
        ("ode_bounded", bounded, "|a| <= 1 within 100 tol".into()),
        (
            "ode_error_decreasing",
            decreasing,
            format!("| |a| - N(x) | from {:.6e} to {:.6e}", errs.first().copied().unwrap_or(0.0), errs.last().copied().unwrap_or(0.0)),
        ),
    ]
}

/// `start:factor:count` → `start·factor^k`, `k < count`.
pub fn parse_grid(s: &str) -> Result<Vec<f64>, CliError> {
    let bad = || CliError::Usage(format!("--eps-grid expects start:factor:count, got {s:?}"));
    let parts: Vec<&str> = s.split(':').collect();
    let [start, factor, count] = parts.as_slice() else { return Err(bad()) };
    let start: f64 = start.trim().parse().map_err(|_| bad())?;
    let factor: f64 = factor.trim().parse().map_err(|_| bad())?;
    let count: usize = count.trim().parse().map_err(|_| bad())?;
    if !(start > 0.0 && factor > 0.0 && start.is_finite() && factor.is_finite()) || count == 0 {
        return Err(bad());
    }
    Ok((0..count).map(|k| start * factor.powi(k as i32)).collect())
}

fn n_state_model(a: &NStateModelArgs) -> Result<NStateModel, CliError> {
    let mut spec: NStateSpec = match model_file::load(&a.model)? {
        ModelFile::NState(s) => s,
        ModelFile::TwoState(_) => {
            return Err(CliError::Model { source_name: a.model.display().to_string(), message: "expected kind \"n-state\"".into() })
        }
    };
    if let Some(x) = a.x {
        spec.x = x;
    }
    if let Some(eps) = a.eps {
        spec.eps = eps;
    }
    spec.build()
}

fn n_state_params(r: &mut RunReport, m: &NStateModel) {
    r.param("levels", m.dim());
    r.param("x", m.x());
    r.param("eps", m.eps());
    r.param("ground_index", m.ground_index());
    r.param("min_gap", m.min_gap());
}

fn n_state(cmd: &NStateCmd, argv: Vec<String>) -> Result<(RunReport, Output), CliError> {
    let mut r = RunReport::new(argv);
    let output = match cmd {
        NStateCmd::Dyson { model, t, output } => {
            let m = n_state_model(model)?;
            n_state_params(&mut r, &m);
            r.param("t", *t);
            let d = nstate::dyson2(&m, *t);
            r.param("phase_energy", d.phase_energy);
            let mut tab = Table::new(
                "dyson2",
                vec![
                    Column::input("n"),
                    Column::complex("c0", Method::Dyson2),
                    Column::complex("c1", Method::Dyson2),
                    Column::complex("c2", Method::Dyson2),
                    Column::complex("vector", Method::Dyson2),
                ],
            );
            for n in 0..m.dim() {
                tab.push(vec![
                    Cell::index(n),
                    Cell::complex(d.terms[0][n]),
                    Cell::complex(d.terms[1][n]),
                    Cell::complex(d.terms[2][n]),
                    Cell::complex(d.vector[n]),
                ]);
            }
            r.tables.push(tab);
            output
        }
        NStateCmd::Recursion { model, order, jet_order, output } => {
            let m = n_state_model(model)?;
            n_state_params(&mut r, &m);
            r.param("order", *order);
            r.param("jet_order", *jet_order);
            let rs = nstate::rs_recursion(&m, *order, *jet_order)?;
            let mut xi_cols = vec![Column::input("n")];
            for k in 0..=*jet_order {
                xi_cols.push(Column::complex(&format!("xi_d{k}"), Method::PhaseRecursion));
            }
            let mut xi = Table::new("xi", xi_cols);
            let mut phi = Table::new("phi", vec![Column::input("n"), Column::input("component"), Column::complex("phi", Method::PhaseRecursion)]);
            for n in 1..=*order {
                let mut row = vec![Cell::index(n)];
                row.extend(rs.xi(n).coeffs().iter().map(|c| Cell::complex(*c)));
                xi.push(row);
                for (j, c) in rs.phi_value(n).into_iter().enumerate() {
                    phi.push(vec![Cell::index(n), Cell::index(j), Cell::complex(c)]);
                }
            }
            r.tables.push(xi);
            r.tables.push(phi);
            r.notes.push(SIGN_NOTE.into());
            output
        }
        NStateCmd::Split { model, order, output } => {
            let m = n_state_model(model)?;
            n_state_params(&mut r, &m);
            r.param("order", *order);
            let s = nstate::g_split(&m, *order)?;
            r.tables.push(split_table(&s));
            output
        }
        NStateCmd::Assemble { model, order, output } => {
            let m = n_state_model(model)?;
            n_state_params(&mut r, &m);
            r.param("order", *order);
            let a = nstate::assemble_state(&m, *order)?;
            r.param("energy", a.energy);
            let mut st = Table::new("state", vec![Column::input("component"), Column::complex("state", Method::PhaseRecursion)]);
            for (j, c) in a.state.iter().enumerate() {
                st.push(vec![Cell::index(j), Cell::complex(*c)]);
            }
            r.tables.push(st);
            r.tables.push(split_table(&a.split));
            output
        }
        NStateCmd::Evolve { model, t_end, ode, output } => {
            let m = n_state_model(model)?;
            n_state_params(&mut r, &m);
            r.param("t_end", *t_end);
            r.param("tol", ode.tol);
            r.param("start_threshold", ode.start_threshold);
            let tr = nstate::evolve_nstate(&m, *t_end, ode.tol, ode.start_threshold)?;
            r.param("t_start", tr.times[0]);
            r.param("accepted_steps", tr.accepted_steps);
            r.param("rejected_steps", tr.rejected_steps);
            let mut cols = vec![Column::input("t")];
            for j in 0..m.dim() {
                cols.push(Column::complex(&format!("psi_{j}"), Method::Ode));
            }
            cols.push(Column::real("norm", Method::Ode));
            let mut tab = Table::new("trajectory", cols);
            for (time, s) in tr.times.iter().zip(&tr.states) {
                let mut row = vec![Cell::real(*time)];
                row.extend(s.iter().map(|c| Cell::complex(*c)));
                row.push(Cell::real(s.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt()));
                tab.push(row);
            }
            r.tables.push(tab);
            output
        }
        NStateCmd::Oracle { model, output } => {
            let m = n_state_model(model)?;
            n_state_params(&mut r, &m);
            let (shift, vec) = nstate::oracle_state(&m)?;
            let mut t = Table::new("oracle", vec![Column::real("delta_e", Method::Oracle), Column::real("energy", Method::Oracle)]);
            t.push(vec![Cell::real(shift), Cell::real(m.ground_energy() + shift)]);
            let mut v = Table::new("eigenvector", vec![Column::input("component"), Column::complex("v", Method::Oracle)]);
            for (j, c) in vec.iter().enumerate() {
                v.push(vec![Cell::index(j), Cell::complex(*c)]);
            }
            r.tables.push(t);
            r.tables.push(v);
            output
        }
        NStateCmd::Compare { model, order, ode, output } => {
            let m = n_state_model(model)?;
            n_state_params(&mut r, &m);
            r.param("order", *order);
            r.param("tol", ode.tol);
            r.param("start_threshold", ode.start_threshold);
            let split = nstate::g_split(&m, *order)?;
            let (shift, ev) = nstate::oracle_state(&m)?;
            let mut sh = Table::new(
                "shift",
                vec![
                    Column::real("delta_e_series", Method::PhaseRecursion),
                    Column::real("delta_e_oracle", Method::Oracle),
                    Column::residual("residual", Method::PhaseRecursion, Method::Oracle),
                    Column::real("last_term", Method::PhaseRecursion),
                ],
            );
            sh.push(vec![
                Cell::real(split.delta_e),
                Cell::real(shift),
                Cell::real((split.delta_e - shift).abs()),
                Cell::real(split.last_term),
            ]);
            let cv = nstate::correction_vector(&m, *order)?;
            let tr = nstate::evolve_nstate(&m, 0.0, ode.tol, ode.start_threshold)?;
            let g = m.ground_index();
            let ode_ratios = nstate::component_ratios(tr.final_state(), g);
            let rec_ratios = nstate::component_ratios(&cv, g);
            let orc_ratios = nstate::component_ratios(&ev, g);
            let mut rt = Table::new(
                "ratios",
                vec![
                    Column::input("component"),
                    Column::real("ratio_ode", Method::Ode),
                    Column::real("ratio_recursion", Method::PhaseRecursion),
                    Column::real("ratio_oracle", Method::Oracle),
                    Column::residual("res_ode_recursion", Method::Ode, Method::PhaseRecursion),
                    Column::residual("res_recursion_oracle", Method::PhaseRecursion, Method::Oracle),
                ],
            );
            for j in 0..m.dim() {
                rt.push(vec![
                    Cell::index(j),
                    Cell::real(ode_ratios[j]),
                    Cell::real(rec_ratios[j]),
                    Cell::real(orc_ratios[j]),
                    Cell::real((ode_ratios[j] - rec_ratios[j]).abs()),
                    Cell::real((rec_ratios[j] - orc_ratios[j]).abs()),
                ]);
            }
            r.tables.push(sh);
            r.tables.push(rt);
            output
        }
        NStateCmd::Gen { .. } => unreachable!("handled by execute"),
    };
    Ok((r, output.clone()))
}

fn split_table(s: &nstate::GSplit) -> Table {
    let mut t = Table::new(
        "split",
        ["g_a", "delta_e", "g_b", "g_b_phase", "last_term", "imag_residue"]
            .iter()
            .map(|n| Column::real(n, Method::PhaseRecursion))
            .collect(),
    );
    t.push(vec![
        Cell::real(s.g_a),
        Cell::real(s.delta_e),
        Cell::real(s.g_b),
        Cell::real(s.g_b_phase),
        Cell::real(s.last_term),
        Cell::real(s.imag_residue),
    ]);
    t
}
